#include <atomic>
#include <chrono>
#include <future>
#include <mutex>
#include <sstream>
#include <thread>

#include "doctest.h"

#include "devquad/error.hpp"
#include "devquad/obj_io.hpp"
#include "devquad/server.hpp"
#include "devquad/session.hpp"
#include "devquad/wire.hpp"
#include "fixtures.hpp"

using namespace devquad;
namespace fx = devquad::fixtures;
using nlohmann::json;
using namespace std::chrono_literals;

namespace {

struct Collector {
  std::mutex mutex;
  std::vector<Outgoing> events;

  EventSink sink() {
    return [this](const Outgoing& o) {
      std::lock_guard lock(mutex);
      events.push_back(o);
    };
  }
  std::vector<Outgoing> copy() {
    std::lock_guard lock(mutex);
    return events;
  }
  std::size_t size() {
    std::lock_guard lock(mutex);
    return events.size();
  }
};

std::string bumpy_obj(int n = 7) {
  const QuadMesh m = fx::sampled_grid(n, n, [](double u, double v) {
    return Vec3(u, v, 0.15 * std::sin(4 * u) * std::cos(3 * v));
  });
  std::ostringstream s;
  write_obj(m, s);
  return s.str();
}

std::vector<double> positions_of(const json& m) { return m.at("positions").get<std::vector<double>>(); }

}  // namespace

TEST_CASE("session basics") {
  Collector c;
  Session s("a", c.sink());

  const json hello = s.handle_message({{"type", "hello"}});
  CHECK(hello["type"] == "ack");
  CHECK(hello["binary_mode"] == false);

  CHECK(s.handle_message({{"type", "start"}})["code"] == "MalformedMessage");
  CHECK(s.handle_message({{"type", "jump"}})["code"] == "MalformedMessage");
  CHECK(s.handle_message(json::array())["code"] == "MalformedMessage");
  CHECK(s.handle_message({{"type", "hello"}, {"session", "b"}})["code"] == "InvalidSession");

  const json loaded = s.handle_message({{"type", "load_mesh"}, {"obj", bumpy_obj()}, {"fix_boundary", true}});
  CHECK(loaded["vertices"] == 49);
  CHECK(loaded["faces"] == 36);
  CHECK(s.handle_message({{"type", "drag"}, {"vertex", 99}, {"target", {0, 0, 0}}})["code"] == "UnknownVertex");
  CHECK(s.handle_message({{"type", "drag"}, {"vertex", 1}, {"target", {0, 0}}})["code"] == "MalformedMessage");

  const json snap = s.handle_message({{"type", "snapshot"}});
  CHECK(snap["type"] == "snapshot");
  CHECK(positions_of(snap).size() == 3 * 49);
  CHECK(snap["normals"].size() == 3 * 36);
  CHECK(snap["dev"].size() == 36);

  const json saved = s.handle_message({{"type", "save_obj"}});
  std::istringstream in(saved["obj"].get<std::string>());
  CHECK(read_obj(in).face_count() == 36);

  // Every reply also went to the sink.
  CHECK(c.size() == 10);
}

TEST_CASE("invalid weights leave the session unchanged") {
  Collector c;
  Session s("a", c.sink());
  s.handle_message({{"type", "load_mesh"}, {"obj", bumpy_obj()}});
  const auto rev = s.revision();
  const json r = s.handle_message({{"type", "set_weights"}, {"weights", {{"dev", -1.0}}}});
  CHECK(r["type"] == "error");
  CHECK(r["code"] == "MalformedMessage");
  CHECK(s.revision() == rev);
  CHECK(s.handle_message({{"type", "set_weights"}, {"weights", {{"dev", 2.0}}}})["type"] == "ack");
  CHECK(s.revision() == rev + 1);
  CHECK(s.handle_message({{"type", "set_mode"}, {"mode", "rubber"}})["code"] == "MalformedMessage");
  CHECK(s.handle_message({{"type", "set_mode"}, {"mode", "elastic"}})["type"] == "ack");
}

TEST_CASE("optimization runs to quiescence") {
  Collector c;
  Session s("a", c.sink());
  s.handle_message({{"type", "load_mesh"}, {"obj", bumpy_obj()}, {"fix_boundary", true}});
  s.handle_message({{"type", "start"}});
  REQUIRE(s.wait_idle(60s));
  CHECK((s.status() == RunStatus::Converged || s.status() == RunStatus::Unreachable));
  const auto events = c.copy();
  CHECK(events.back().message["type"] == "status");
  std::uint64_t last = 0;
  bool iterated = false;
  for (const Outgoing& o : events) {
    const auto rev = o.message["revision"].get<std::uint64_t>();
    CHECK(rev >= last);
    last = rev;
    iterated = iterated || o.message["type"] == "iteration";
  }
  CHECK(iterated);
  const std::size_t n = c.size();
  std::this_thread::sleep_for(200ms);
  CHECK(c.size() == n);
  CHECK(s.runs_started() == 1);
}

TEST_CASE("a drag restarts the running optimization") {
  Collector c;
  Session s("a", c.sink());
  s.handle_message({{"type", "load_mesh"}, {"obj", bumpy_obj(9)}, {"fixed", {0}}});
  s.handle_message({{"type", "set_weights"}, {"weights", {{"pos", 10.0}}}});
  s.handle_message({{"type", "start"}});
  const Vec3 target(1.3, 1.2, 0.4);
  s.handle_message({{"type", "drag"}, {"vertex", 80}, {"target", {target.x(), target.y(), target.z()}}});
  REQUIRE(s.wait_idle(60s));
  CHECK(s.runs_started() >= 1);
  CHECK(s.runs_started() <= 2);
  CHECK(s.runs_started() - s.runs_cancelled() == 1);

  const json snap = s.handle_message({{"type", "snapshot"}});
  const auto p = positions_of(snap);
  const Vec3 moved(p[3 * 80], p[3 * 80 + 1], p[3 * 80 + 2]);
  const QuadMesh m = [] {
    std::istringstream in(bumpy_obj(9));
    return read_obj(in);
  }();
  CHECK((moved - target).norm() < 0.5 * (m.vertex(80) - target).norm());
  CHECK(Vec3(p[0], p[1], p[2]) == m.vertex(0));
}

TEST_CASE("paused snapshot equals the last event") {
  Collector c;
  Session s("a", c.sink());
  s.handle_message({{"type", "load_mesh"}, {"obj", bumpy_obj(11)}});
  const auto initial = positions_of(s.handle_message({{"type", "snapshot"}}));
  s.handle_message({{"type", "start"}});
  std::this_thread::sleep_for(30ms);
  s.handle_message({{"type", "pause"}});
  REQUIRE(s.wait_idle(10s));
  CHECK(s.status() != RunStatus::Stepping);

  std::vector<double> last = initial;
  for (const Outgoing& o : c.copy())
    if (o.message["type"] == "iteration") last = positions_of(o.message);
  const auto snap = positions_of(s.handle_message({{"type", "snapshot"}}));
  CHECK(snap == last);
  std::this_thread::sleep_for(100ms);
  CHECK(positions_of(s.handle_message({{"type", "snapshot"}})) == snap);
}

TEST_CASE("stale revisions are answered with a snapshot") {
  Collector c;
  Session s("a", c.sink());
  s.handle_message({{"type", "load_mesh"}, {"obj", bumpy_obj()}});
  const auto old = s.revision();
  s.handle_message({{"type", "drag"}, {"vertex", 3}, {"target", {0, 0, 1}}});
  CHECK(s.handle_message({{"type", "drag"}, {"vertex", 3}, {"target", {0, 0, 1}}, {"revision", old}})["type"] == "ack");
  s.handle_message({{"type", "reset"}});
  const json r = s.handle_message({{"type", "drag"}, {"vertex", 3}, {"target", {0, 0, 1}}, {"revision", old}});
  CHECK(r["code"] == "StaleRevision");
  REQUIRE(r.contains("snapshot"));
  CHECK(r["snapshot"]["revision"] == s.revision());
  CHECK(positions_of(r["snapshot"]).size() == 3 * 49);
  CHECK(s.handle_message({{"type", "snapshot"}, {"revision", -1}})["code"] == "MalformedMessage");
}

TEST_CASE("binary mode") {
  Collector c;
  Session s("a", c.sink());
  CHECK(s.handle_message({{"type", "hello"}, {"binary", true}})["binary_mode"] == true);
  s.handle_message({{"type", "load_mesh"}, {"obj", bumpy_obj()}});
  const Outgoing snap = s.snapshot();
  REQUIRE(snap.message.contains("binary"));
  CHECK_FALSE(snap.message.contains("positions"));
  std::size_t total = 0;
  for (const auto& a : snap.message["binary"]) total += a["count"].get<std::size_t>();
  CHECK(snap.binary.size() == 4 * total);
  const std::vector<float> values = decode_float32(snap.binary);
  REQUIRE(snap.message["binary"][0]["name"] == "positions");
  std::istringstream in(bumpy_obj());
  const QuadMesh m = read_obj(in);
  for (int v = 0; v < m.vertex_count(); ++v)
    for (int k = 0; k < 3; ++k) CHECK(values[3 * v + k] == static_cast<float>(m.vertex(v)[k]));
}

TEST_CASE("session manager") {
  SessionManager mgr;
  Collector a, b;
  const std::string ia = mgr.create(a.sink()), ib = mgr.create(b.sink());
  CHECK(ia != ib);
  CHECK(mgr.size() == 2);
  mgr.handle(ia, {{"type", "hello"}});
  CHECK(a.size() == 1);
  CHECK(b.size() == 0);
  try {
    mgr.get("nope");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidSession);
  }
  mgr.close(ia);
  CHECK(mgr.size() == 1);
  CHECK_THROWS_AS(mgr.handle(ia, {{"type", "hello"}}), Error);
}

TEST_CASE("wire framing") {
  const std::string a = encode_frame("hello"), b = encode_frame(""), c = encode_frame(std::string(1000, 'x'));
  CHECK(a.size() == 9);
  CHECK(static_cast<unsigned char>(a[0]) == 5);
  FrameDecoder d;
  const std::string stream = a + b + c;
  for (char ch : stream) d.feed(std::string_view(&ch, 1));
  CHECK(d.next() == "hello");
  CHECK(d.next() == "");
  CHECK(d.next() == std::string(1000, 'x'));
  CHECK_FALSE(d.next().has_value());

  d.feed(a.substr(0, 3));
  CHECK_FALSE(d.next().has_value());
  d.feed(a.substr(3));
  CHECK(d.next() == "hello");

  FrameDecoder big;
  big.feed(std::string("\xff\xff\xff\xff", 4));
  CHECK_THROWS_AS(big.next(), Error);

  const std::vector<double> v = {1.5, -2.0, 0.1};
  const std::vector<float> f = decode_float32(encode_float32(v));
  CHECK(f == std::vector<float>{1.5f, -2.0f, 0.1f});
  CHECK_THROWS_AS(decode_float32("abc"), Error);
}

TEST_CASE("session over a socket") {
  std::atomic<bool> stop{false};
  std::promise<std::uint16_t> bound;
  ServerOptions opts;
  std::thread server([&] { serve(opts, stop, [&](std::uint16_t p) { bound.set_value(p); }); });
  auto port_future = bound.get_future();
  REQUIRE(port_future.wait_for(5s) == std::future_status::ready);
  const std::uint16_t port = port_future.get();
  {
    WireClient client("127.0.0.1", port);
    client.send({{"type", "hello"}, {"binary", true}});
    auto hello = client.receive(5000);
    REQUIRE(hello);
    CHECK(hello->message["binary_mode"] == true);
    client.send({{"type", "load_mesh"}, {"obj", bumpy_obj()}});
    auto loaded = client.receive(5000);
    REQUIRE(loaded);
    CHECK(loaded->message["faces"] == 36);
    client.send({{"type", "snapshot"}});
    auto snap = client.receive(5000);
    REQUIRE(snap);
    CHECK(snap->message["type"] == "snapshot");
    CHECK(snap->binary.size() > 4 * 3 * 49);
    client.send({{"type", "nonsense"}});
    auto err = client.receive(5000);
    REQUIRE(err);
    CHECK(err->message["code"] == "MalformedMessage");
  }
  stop = true;
  server.join();
}
