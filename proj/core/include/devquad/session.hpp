#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "devquad/config.hpp"
#include "devquad/mesh.hpp"
#include "devquad/state.hpp"

namespace devquad {

enum class RunStatus { Idle, Stepping, Converged, Unreachable };
std::string_view to_string(RunStatus s);

// One outgoing message: JSON plus, in binary mode, the float32 arrays the
// JSON announces under "binary".
struct Outgoing {
  nlohmann::json message;
  std::string binary;
};

using EventSink = std::function<void(const Outgoing&)>;

struct SessionOptions {
  double max_events_per_second = 30.0;
  int max_iterations = 200;
  double tolerance = 1e-6;  // per interior face E_dev counted as converged
};

// Interactive optimization session. Messages are handled in call order; the
// optimization runs on a worker thread and checks for restarts between LM
// iterations. Every reply and event goes through the sink, in revision
// order, serialized by the session.
//
// Messages (JSON objects with a "type"):
//   hello {binary}  (reply carries binary_mode)
//   load_mesh {obj | path, fix_boundary, fixed}
//   set_handles {handles}     drag {vertex, target}
//   set_weights {weights}     set_mode {mode}
//   set_gliding_curve {points, radius}
//   start  pause  reset  snapshot  save_obj {path}
// An optional "revision" older than the last load_mesh or reset is answered
// with a StaleRevision error carrying the current snapshot.
class Session {
 public:
  Session(std::string id, EventSink sink, SessionOptions options = {});
  ~Session();
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  // Returns the reply that was also sent to the sink.
  nlohmann::json handle_message(const nlohmann::json& msg);

  const std::string& id() const { return id_; }
  std::uint64_t revision() const;
  RunStatus status() const;
  int runs_started() const;
  int runs_cancelled() const;
  // Blocks until the worker has nothing queued and is not stepping, or the
  // timeout passes. Returns true if idle.
  bool wait_idle(std::chrono::milliseconds timeout) const;

  // Snapshot payload of the current state (positions, normals, per-face
  // E_dev, Gauss points, rulings, last trace row).
  Outgoing snapshot() const;

 private:
  nlohmann::json dispatch(const nlohmann::json& msg);
  void worker_loop();
  void request_run_locked();
  void cancel_locked();
  void set_status_locked(RunStatus s);
  Outgoing payload_locked(const std::string& type) const;
  void emit_locked(Outgoing out);
  void flush_pending_locked();
  nlohmann::json reply_locked(const std::string& of);

  std::string id_;
  EventSink sink_;
  SessionOptions options_;

  mutable std::mutex mutex_;
  mutable std::condition_variable cv_;

  std::unique_ptr<QuadMesh> mesh_;
  std::vector<Vec3> loaded_positions_;
  std::vector<char> loaded_fixed_;
  std::optional<State> state_;
  JobConfig config_;
  std::vector<Vec3> glide_points_;
  bool binary_ = false;

  std::uint64_t revision_ = 0;
  std::uint64_t base_revision_ = 0;
  RunStatus status_ = RunStatus::Idle;
  bool running_ = false;      // started and not paused
  std::uint64_t generation_ = 0;
  bool job_pending_ = false;
  bool stepping_ = false;
  bool shutdown_ = false;
  int runs_started_ = 0;
  int runs_cancelled_ = 0;
  nlohmann::json last_row_;

  std::optional<Outgoing> pending_event_;
  std::chrono::steady_clock::time_point last_emit_{};

  std::thread worker_;
};

// Registry of independent sessions.
class SessionManager {
 public:
  explicit SessionManager(SessionOptions options = {}) : options_(options) {}

  std::string create(EventSink sink);
  // Throws Error{InvalidSession} for unknown ids.
  Session& get(const std::string& id);
  nlohmann::json handle(const std::string& id, const nlohmann::json& msg);
  void close(const std::string& id);
  std::size_t size() const;

 private:
  SessionOptions options_;
  mutable std::mutex mutex_;
  std::map<std::string, std::unique_ptr<Session>> sessions_;
  std::uint64_t next_id_ = 1;
};

// Error reply {"type":"error","code":...,"message":...}.
nlohmann::json error_reply(std::string_view code, const std::string& message);

}  // namespace devquad
