#include "devquad/session.hpp"

#include <fstream>
#include <sstream>

#include "devquad/error.hpp"
#include "devquad/obj_io.hpp"
#include "devquad/report.hpp"
#include "devquad/wire.hpp"
#include "devquad/workflow.hpp"

namespace devquad {

using nlohmann::json;

std::string_view to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Idle: return "idle";
    case RunStatus::Stepping: return "stepping";
    case RunStatus::Converged: return "converged";
    case RunStatus::Unreachable: return "unreachable";
  }
  return "idle";
}

json error_reply(std::string_view code, const std::string& message) {
  return {{"type", "error"}, {"code", std::string(code)}, {"message", message}};
}

namespace {

[[noreturn]] void malformed(const std::string& what) { throw Error(ErrorCode::MalformedMessage, what); }

Vec3 vec3(const json& j) {
  if (!j.is_array() || j.size() != 3) malformed("expected [x, y, z]");
  for (const auto& x : j)
    if (!x.is_number()) malformed("expected [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json row_json(const TraceRow& t) {
  json raw = json::object();
  for (int k = 0; k < kFamilyCount; ++k) raw[std::string(family_name(static_cast<Family>(k)))] = t.raw[k];
  return {{"iteration", t.iteration}, {"accepted", t.accepted}, {"damping", t.damping},
          {"energy", t.energy}, {"stage", t.stage}, {"event", t.event}, {"raw", raw}};
}

bool is_mutation(const std::string& type) {
  return type == "set_handles" || type == "drag" || type == "set_weights" || type == "set_mode" ||
         type == "set_gliding_curve";
}

}  // namespace

Session::Session(std::string id, EventSink sink, SessionOptions options)
    : id_(std::move(id)), sink_(std::move(sink)), options_(options) {
  config_.weights.fair_v = 0.01;
  config_.weights.fair_n = 0.01;
  config_.weights.pos = 1.0;
  config_.solver.max_iterations = options_.max_iterations;
  config_.tolerance = options_.tolerance;
  worker_ = std::thread([this] { worker_loop(); });
}

Session::~Session() {
  {
    std::lock_guard lock(mutex_);
    shutdown_ = true;
    ++generation_;
  }
  cv_.notify_all();
  worker_.join();
}

std::uint64_t Session::revision() const {
  std::lock_guard lock(mutex_);
  return revision_;
}

RunStatus Session::status() const {
  std::lock_guard lock(mutex_);
  return status_;
}

int Session::runs_started() const {
  std::lock_guard lock(mutex_);
  return runs_started_;
}

int Session::runs_cancelled() const {
  std::lock_guard lock(mutex_);
  return runs_cancelled_;
}

bool Session::wait_idle(std::chrono::milliseconds timeout) const {
  std::unique_lock lock(mutex_);
  return cv_.wait_for(lock, timeout, [&] { return !job_pending_ && !stepping_; });
}

Outgoing Session::snapshot() const {
  std::lock_guard lock(mutex_);
  return payload_locked("snapshot");
}

void Session::emit_locked(Outgoing out) {
  if (sink_) sink_(out);
  last_emit_ = std::chrono::steady_clock::now();
}

void Session::flush_pending_locked() {
  if (!pending_event_) return;
  Outgoing out = std::move(*pending_event_);
  pending_event_.reset();
  emit_locked(std::move(out));
}

void Session::set_status_locked(RunStatus s) {
  flush_pending_locked();
  status_ = s;
  emit_locked({{{"type", "status"}, {"session", id_}, {"revision", revision_},
                {"status", std::string(to_string(s))}},
               {}});
}

Outgoing Session::payload_locked(const std::string& type) const {
  Outgoing out;
  json& m = out.message;
  m["type"] = type;
  m["session"] = id_;
  m["revision"] = revision_;
  m["status"] = std::string(to_string(status_));
  m["trace"] = last_row_;
  if (!mesh_ || !state_) return out;

  const QuadMesh& mesh = *mesh_;
  const State& s = *state_;
  std::vector<std::pair<std::string, std::vector<double>>> arrays;
  std::vector<double> pos, nor, dev, gauss, rul;
  pos.reserve(3 * mesh.vertex_count());
  for (int v = 0; v < mesh.vertex_count(); ++v)
    for (int k = 0; k < 3; ++k) pos.push_back(s.position(v)[k]);
  for (int f = 0; f < mesh.face_count(); ++f) {
    const Vec3 n = s.normal(f);
    const double len = n.norm();
    for (int k = 0; k < 3; ++k) {
      nor.push_back(n[k]);
      gauss.push_back(len > 0 ? n[k] / len : 0.0);
    }
    if (mesh.is_interior_face(f)) {
      std::array<Vec3, 4> r;
      for (int i = 0; i < 4; ++i) r[i] = s.ruling(4 * f + i);
      dev.push_back(dev_residual(r).squaredNorm());
    } else {
      dev.push_back(std::numeric_limits<double>::quiet_NaN());
    }
  }
  for (int h = 0; h < mesh.halfedge_count(); ++h) {
    const int o = mesh.opposite(h);
    if (o < 0 || o < h) continue;
    const Vec3 a = 0.5 * (s.position(mesh.from(h)) + s.position(mesh.to(h)));
    const Vec3 d = s.ruling(h);
    for (int k = 0; k < 3; ++k) rul.push_back(a[k]);
    for (int k = 0; k < 3; ++k) rul.push_back(d[k]);
  }
  arrays.emplace_back("positions", std::move(pos));
  arrays.emplace_back("normals", std::move(nor));
  arrays.emplace_back("dev", std::move(dev));
  arrays.emplace_back("gauss", std::move(gauss));
  arrays.emplace_back("rulings", std::move(rul));

  if (binary_) {
    json layout = json::array();
    for (auto& [name, values] : arrays) {
      layout.push_back({{"name", name}, {"count", values.size()}});
      out.binary += encode_float32(values);
    }
    m["binary"] = layout;
  } else {
    for (auto& [name, values] : arrays) m[name] = values;
  }
  return out;
}

void Session::request_run_locked() {
  ++generation_;
  job_pending_ = true;
  cv_.notify_all();
}

void Session::cancel_locked() {
  ++generation_;
  job_pending_ = false;
  cv_.notify_all();
}

json Session::reply_locked(const std::string& of) {
  return {{"type", "ack"}, {"of", of}, {"session", id_}, {"revision", revision_},
          {"status", std::string(to_string(status_))}};
}

json Session::handle_message(const json& msg) {
  Outgoing out;
  try {
    out.message = dispatch(msg);
  } catch (const Error& e) {
    std::lock_guard lock(mutex_);
    out.message = error_reply(to_string(e.code()), e.what());
    out.message["session"] = id_;
    out.message["revision"] = revision_;
    if (e.code() == ErrorCode::StaleRevision) {
      Outgoing snap = payload_locked("snapshot");
      out.message["snapshot"] = snap.message;
      out.binary = std::move(snap.binary);
    }
    emit_locked(out);
    return out.message;
  } catch (const json::exception& e) {
    std::lock_guard lock(mutex_);
    out.message = error_reply("MalformedMessage", e.what());
    out.message["session"] = id_;
    emit_locked(out);
    return out.message;
  }
  return out.message;
}

json Session::dispatch(const json& msg) {
  if (!msg.is_object() || !msg.contains("type") || !msg["type"].is_string())
    malformed("message needs a string 'type'");
  const std::string type = msg["type"];
  std::unique_lock lock(mutex_);

  if (msg.contains("session") && msg["session"] != id_)
    throw Error(ErrorCode::InvalidSession, "message addressed to another session");
  if (msg.contains("revision")) {
    if (!msg["revision"].is_number_unsigned()) malformed("'revision' must be a nonnegative integer");
    const auto rev = msg["revision"].get<std::uint64_t>();
    if (rev < base_revision_) throw Error(ErrorCode::StaleRevision, "mesh changed since this revision");
  }

  auto finish = [&](const std::string& of, json extra = json::object()) {
    json reply = reply_locked(of);
    for (auto it = extra.begin(); it != extra.end(); ++it) reply[it.key()] = it.value();
    emit_locked({reply, {}});
    return reply;
  };
  auto stop_worker = [&] {
    cancel_locked();
    cv_.wait(lock, [&] { return !stepping_; });
    flush_pending_locked();
  };
  auto need_mesh = [&] {
    if (!mesh_) malformed("no mesh loaded");
  };

  if (type == "hello") {
    if (msg.contains("binary")) binary_ = msg["binary"].get<bool>();
    return finish(type, {{"binary_mode", binary_}, {"protocol", 1}});
  }
  if (type == "load_mesh") {
    QuadMesh mesh;
    if (msg.contains("obj")) {
      std::istringstream in(msg["obj"].get<std::string>());
      mesh = read_obj(in);
    } else if (msg.contains("path")) {
      mesh = load_mesh(msg["path"].get<std::string>());
    } else {
      malformed("load_mesh needs 'obj' or 'path'");
    }
    if (msg.value("fix_boundary", false)) mesh.fix_boundary();
    if (msg.contains("fixed"))
      for (int v : msg["fixed"].get<std::vector<int>>()) {
        if (v < 0 || v >= mesh.vertex_count()) throw Error(ErrorCode::UnknownVertex, "fixed vertex", {v});
        mesh.set_fixed(v, true);
      }
    State fresh = initial_state(mesh);
    stop_worker();
    running_ = false;
    mesh_ = std::make_unique<QuadMesh>(std::move(mesh));
    loaded_positions_.assign(mesh_->vertices().begin(), mesh_->vertices().end());
    state_ = std::move(fresh);
    config_.handles.clear();
    config_.gliding.reset();
    glide_points_.clear();
    last_row_ = json();
    base_revision_ = ++revision_;
    status_ = RunStatus::Idle;
    return finish(type, {{"vertices", mesh_->vertex_count()}, {"faces", mesh_->face_count()}});
  }
  if (type == "reset") {
    need_mesh();
    stop_worker();
    running_ = false;
    mesh_->set_vertices(loaded_positions_);
    state_ = initial_state(*mesh_);
    config_.handles.clear();
    last_row_ = json();
    base_revision_ = ++revision_;
    status_ = RunStatus::Idle;
    return finish(type);
  }
  if (type == "start") {
    need_mesh();
    running_ = true;
    request_run_locked();
    return finish(type);
  }
  if (type == "pause") {
    stop_worker();
    running_ = false;
    if (status_ == RunStatus::Stepping) status_ = RunStatus::Idle;
    return finish(type);
  }
  if (type == "snapshot") {
    Outgoing snap = payload_locked("snapshot");
    emit_locked(snap);
    return snap.message;
  }
  if (type == "save_obj") {
    need_mesh();
    std::ostringstream text;
    write_obj(state_->positions(), mesh_->faces(), text);
    if (msg.contains("path")) {
      std::ofstream file(msg["path"].get<std::string>());
      if (!file || !(file << text.str())) throw Error(ErrorCode::Io, "cannot write OBJ");
      return finish(type);
    }
    return finish(type, {{"obj", text.str()}});
  }

  if (!is_mutation(type)) malformed("unknown message type '" + type + "'");
  need_mesh();

  if (type == "set_handles") {
    if (!msg.contains("handles") || !msg["handles"].is_array()) malformed("set_handles needs 'handles'");
    std::vector<HandleSpec> handles;
    for (const auto& h : msg["handles"]) {
      const int v = h.at("vertex").get<int>();
      if (v < 0 || v >= mesh_->vertex_count()) throw Error(ErrorCode::UnknownVertex, "handle vertex", {v});
      handles.push_back({v, h.contains("target") ? vec3(h["target"]) : state_->position(v)});
    }
    config_.handles = std::move(handles);
  } else if (type == "drag") {
    const int v = msg.at("vertex").get<int>();
    if (v < 0 || v >= mesh_->vertex_count()) throw Error(ErrorCode::UnknownVertex, "drag vertex", {v});
    const Vec3 target = vec3(msg.at("target"));
    bool found = false;
    for (auto& h : config_.handles)
      if (h.vertex == v) {
        h.target = target;
        found = true;
      }
    if (!found) config_.handles.push_back({v, target});
  } else if (type == "set_weights") {
    if (!msg.contains("weights")) malformed("set_weights needs 'weights'");
    try {
      config_ = config_from_json({{"version", kConfigVersion}, {"weights", msg["weights"]}}, config_);
    } catch (const Error& e) {
      malformed(e.what());
    }
  } else if (type == "set_mode") {
    const auto mode = parse_material_mode(msg.at("mode").get<std::string>());
    if (!mode) malformed("mode must be 'elastic', 'plastic' or 'none'");
    config_.material = *mode;
  } else if (type == "set_gliding_curve") {
    if (!msg.contains("points") || !msg["points"].is_array()) malformed("set_gliding_curve needs 'points'");
    std::vector<Vec3> pts;
    for (const auto& p : msg["points"]) pts.push_back(vec3(p));
    const double radius = msg.value("radius", 0.0);
    if (radius < 0) malformed("radius must be nonnegative");
    glide_points_ = std::move(pts);
    if (glide_points_.empty()) config_.gliding.reset();
    else config_.gliding = GlidingSpec{"", radius};
  }
  ++revision_;
  if (running_) request_run_locked();
  return finish(type);
}

void Session::worker_loop() {
  std::unique_lock lock(mutex_);
  while (true) {
    cv_.wait(lock, [&] { return shutdown_ || job_pending_; });
    if (shutdown_) return;
    job_pending_ = false;
    const std::uint64_t gen = generation_;
    QuadMesh mesh = *mesh_;
    mesh.set_vertices(state_->positions());
    const JobConfig config = config_;
    ProblemInputs inputs;
    inputs.glide_cloud = glide_points_;
    inputs.iso_reference = loaded_positions_;
    stepping_ = true;
    ++runs_started_;
    set_status_locked(RunStatus::Stepping);
    lock.unlock();

    const auto interval = std::chrono::duration<double>(1.0 / options_.max_events_per_second);
    bool cancelled = false;
    std::optional<ValidationReport> report;
    std::string failure;
    try {
      StandardProblem sp(std::move(mesh), config, inputs);
      auto on_iteration = [&](const State& s, const TraceRow& row) {
        std::lock_guard guard(mutex_);
        if (gen != generation_ || shutdown_) {
          cancelled = true;
          return false;
        }
        if (!row.accepted) return true;
        state_ = s;
        last_row_ = row_json(row);
        ++revision_;
        Outgoing ev = payload_locked("iteration");
        if (std::chrono::steady_clock::now() - last_emit_ >= interval) {
          pending_event_.reset();
          emit_locked(std::move(ev));
        } else {
          pending_event_ = std::move(ev);
        }
        return true;
      };
      const LmResult lm = lm_minimize(sp.problem(), sp.initial_state(), solver_config(config), on_iteration);
      if (lm.reason != Termination::Cancelled) {
        QuadMesh done = sp.mesh();
        done.set_vertices(lm.state.positions());
        report = validate(done);
      }
    } catch (const std::exception& e) {
      failure = e.what();
    }

    lock.lock();
    stepping_ = false;
    if (cancelled || gen != generation_) {
      ++runs_cancelled_;
      flush_pending_locked();
    } else if (!failure.empty()) {
      flush_pending_locked();
      emit_locked({{{"type", "error"}, {"code", "SolverFailure"}, {"session", id_},
                    {"revision", revision_}, {"message", failure}},
                   {}});
      set_status_locked(RunStatus::Unreachable);
    } else {
      const bool ok = report && status_for(*report, config.tolerance) == "converged";
      set_status_locked(ok ? RunStatus::Converged : RunStatus::Unreachable);
    }
    cv_.notify_all();
  }
}

std::string SessionManager::create(EventSink sink) {
  std::lock_guard lock(mutex_);
  std::string id = "s" + std::to_string(next_id_++);
  sessions_.emplace(id, std::make_unique<Session>(id, std::move(sink), options_));
  return id;
}

Session& SessionManager::get(const std::string& id) {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(ErrorCode::InvalidSession, "unknown session '" + id + "'");
  return *it->second;
}

json SessionManager::handle(const std::string& id, const json& msg) { return get(id).handle_message(msg); }

void SessionManager::close(const std::string& id) {
  std::unique_ptr<Session> s;
  {
    std::lock_guard lock(mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw Error(ErrorCode::InvalidSession, "unknown session '" + id + "'");
    s = std::move(it->second);
    sessions_.erase(it);
  }
}

std::size_t SessionManager::size() const {
  std::lock_guard lock(mutex_);
  return sessions_.size();
}

}  // namespace devquad
