#include "asmctl/logbook/store.hpp"

#include "asmctl/common.hpp"
#include "asmctl/durable_io.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace asmctl::logbook {
namespace fs = std::filesystem;

namespace {

constexpr const char* kSessionsDir = "sessions";
constexpr const char* kMediaDir = "media";
constexpr const char* kIndexFile = "index.jsonl";
constexpr const char* kMediaIndexFile = "media_index.jsonl";

std::string read_all(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return {};
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Splits on '\n' and drops whatever follows the last newline.
std::vector<std::string_view> complete_lines(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) break;
    if (eol > pos) out.push_back(text.substr(pos, eol - pos));
    pos = eol + 1;
  }
  return out;
}

MediaArtifact media_from_json(const Json& j) {
  MediaArtifact a;
  a.artifact_id = j.at("artifact_id").get<std::string>();
  a.session_id = j.at("session_id").get<std::string>();
  a.captured_at_ms = j.at("captured_at_ms").get<std::int64_t>();
  const auto kind = media_kind_from_string(j.at("kind").get<std::string>());
  if (!kind) throw StoreError("unknown media kind in index");
  a.kind = *kind;
  a.byte_size = j.at("byte_size").get<std::uint64_t>();
  a.path = j.at("path").get<std::string>();
  return a;
}

}  // namespace

GapDetected::GapDetected(std::string session_id, std::uint64_t expected, std::uint64_t got)
    : std::runtime_error("event gap in session " + session_id + ": expected event_id " +
                         std::to_string(expected) + ", got " + std::to_string(got)),
      session_id_(std::move(session_id)),
      expected_(expected),
      got_(got) {}

const char* to_string(MediaKind kind) {
  return kind == MediaKind::KeyFrame ? "key_frame" : "video_segment";
}

std::optional<MediaKind> media_kind_from_string(std::string_view name) {
  if (name == "key_frame") return MediaKind::KeyFrame;
  if (name == "video_segment") return MediaKind::VideoSegment;
  return std::nullopt;
}

Json to_json(const MediaArtifact& a) {
  return {{"artifact_id", a.artifact_id},   {"session_id", a.session_id},
          {"captured_at_ms", a.captured_at_ms}, {"kind", to_string(a.kind)},
          {"byte_size", a.byte_size},       {"path", a.path}};
}

EventStore::EventStore(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_ / kSessionsDir, ec);
  fs::create_directories(root_ / kMediaDir, ec);
  if (!fs::is_directory(root_ / kSessionsDir) || !fs::is_directory(root_ / kMediaDir)) {
    throw StoreError("cannot create store layout under " + root_.string());
  }

  std::vector<fs::path> logs;
  for (const auto& entry : fs::directory_iterator(root_ / kSessionsDir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") {
      logs.push_back(entry.path());
    }
  }
  std::sort(logs.begin(), logs.end());
  for (const auto& file : logs) recover_session(file);

  // The session logs are authoritative; the index only gains lines for
  // sessions it is missing (a crash between the two writes).
  std::set<std::string> indexed;
  const std::string index_text = read_all(root_ / kIndexFile);
  for (auto line : complete_lines(index_text)) {
    const Json j = Json::parse(line, nullptr, false);
    if (j.is_object() && j.contains("session_id")) {
      indexed.insert(j["session_id"].get<std::string>());
    }
  }
  for (const auto& [id, log] : sessions_) {
    if (indexed.count(id) == 0) {
      WorkEvent begin;
      begin.session_id = id;
      begin.workcell_id = log->workcell_id;
      begin.product_serial = log->serial;
      write_index_entry(begin);
    }
  }

  const std::string media_text = read_all(root_ / kMediaIndexFile);
  for (auto line : complete_lines(media_text)) {
    try {
      auto a = media_from_json(Json::parse(line));
      media_[a.artifact_id] = a;
    } catch (const Json::exception& e) {
      throw StoreError(std::string("corrupt media index: ") + e.what());
    }
  }
}

EventStore::~EventStore() = default;

fs::path EventStore::session_path(const std::string& session_id) const {
  return root_ / kSessionsDir / (session_id + ".jsonl");
}

void EventStore::recover_session(const fs::path& file) {
  std::string text = read_all(file);
  const std::size_t last_nl = text.rfind('\n');
  const std::size_t keep = last_nl == std::string::npos ? 0 : last_nl + 1;
  if (keep != text.size()) {
    fs::resize_file(file, keep);
    text.resize(keep);
  }
  auto log = std::make_shared<SessionLog>();
  const std::string session_id = file.stem().string();
  for (auto line : complete_lines(text)) {
    WorkEvent e;
    try {
      e = parse_json_line(line);
    } catch (const InvalidEvent& err) {
      throw StoreError("corrupt session log " + file.string() + ": " + err.what());
    }
    if (e.session_id != session_id || e.event_id != log->last_id + 1) {
      throw StoreError("corrupt session log " + file.string() + ": out-of-sequence event");
    }
    log->last_id = e.event_id;
    log->last_ts = e.timestamp_ms;
    log->workcell_id = e.workcell_id;
    log->serial = e.product_serial;
    log->ended = e.kind == EventKind::SessionEnd;
  }
  if (log->last_id == 0) return;
  by_serial_[log->serial].push_back(session_id);
  sessions_.emplace(session_id, std::move(log));
}

void EventStore::write_index_entry(const WorkEvent& begin) {
  const Json j = {{"serial", begin.product_serial},
                  {"session_id", begin.session_id},
                  {"workcell_id", begin.workcell_id}};
  append_durable(root_ / kIndexFile, j.dump(-1, ' ', false, Json::error_handler_t::replace) + "\n");
}

std::shared_ptr<EventStore::SessionLog> EventStore::log_for(const std::string& session_id,
                                                            bool create) {
  std::lock_guard lock(sessions_mu_);
  auto it = sessions_.find(session_id);
  if (it != sessions_.end()) return it->second;
  if (!create) return nullptr;
  return sessions_.emplace(session_id, std::make_shared<SessionLog>()).first->second;
}

AppendStatus EventStore::append(const WorkEvent& event) {
  validate_event(event);
  if (event.kind == EventKind::SessionBegin && event.event_id != 1) {
    throw InvalidEvent("session_begin must have event_id 1");
  }
  if (event.event_id == 1 && event.kind != EventKind::SessionBegin) {
    throw InvalidEvent("event_id 1 must be session_begin");
  }

  auto log = log_for(event.session_id, event.event_id == 1);
  if (!log) throw GapDetected(event.session_id, 1, event.event_id);

  std::lock_guard lock(log->mu);
  if (event.event_id <= log->last_id) {
    const std::string stored_text = read_all(session_path(event.session_id));
    for (auto line : complete_lines(stored_text)) {
      const WorkEvent stored = parse_json_line(line);
      if (stored.event_id == event.event_id) {
        if (to_json_line(stored) == to_json_line(event)) return AppendStatus::Duplicate;
        throw EventConflict("event " + std::to_string(event.event_id) + " of session " +
                            event.session_id + " differs from the stored copy");
      }
    }
    throw StoreError("stored event " + std::to_string(event.event_id) + " not found");
  }
  if (event.event_id != log->last_id + 1) {
    throw GapDetected(event.session_id, log->last_id + 1, event.event_id);
  }
  if (log->last_id > 0) {
    if (log->ended) throw InvalidEvent("session " + event.session_id + " has ended");
    if (event.workcell_id != log->workcell_id) throw InvalidEvent("workcell_id changed mid-session");
    if (event.product_serial != log->serial) throw InvalidEvent("product_serial changed mid-session");
    if (event.timestamp_ms < log->last_ts) throw InvalidEvent("timestamp_ms decreased");
  }

  try {
    append_durable(session_path(event.session_id), to_json_line(event) + "\n");
  } catch (const IoError& e) {
    throw StoreError(e.what());
  }

  log->last_id = event.event_id;
  log->last_ts = event.timestamp_ms;
  log->ended = event.kind == EventKind::SessionEnd;
  if (event.kind == EventKind::SessionBegin) {
    log->workcell_id = event.workcell_id;
    log->serial = event.product_serial;
    std::lock_guard index_lock(sessions_mu_);
    write_index_entry(event);
    by_serial_[event.product_serial].push_back(event.session_id);
  }
  return AppendStatus::Stored;
}

std::uint64_t EventStore::last_event_id(const std::string& session_id) const {
  std::shared_ptr<SessionLog> log;
  {
    std::lock_guard lock(sessions_mu_);
    auto it = sessions_.find(session_id);
    if (it == sessions_.end()) return 0;
    log = it->second;
  }
  std::lock_guard lock(log->mu);
  return log->last_id;
}

bool EventStore::has_session(const std::string& session_id) const {
  return last_event_id(session_id) > 0;
}

std::vector<WorkEvent> EventStore::events(const std::string& session_id) const {
  std::vector<WorkEvent> out;
  if (!is_safe_id(session_id)) return out;
  const std::string text = read_all(session_path(session_id));
  for (auto line : complete_lines(text)) {
    out.push_back(parse_json_line(line));
  }
  return out;
}

std::vector<std::string> EventStore::sessions_for_serial(const std::string& serial) const {
  std::lock_guard lock(sessions_mu_);
  auto it = by_serial_.find(serial);
  if (it == by_serial_.end()) return {};
  return it->second;
}

std::vector<std::string> EventStore::serials() const {
  std::lock_guard lock(sessions_mu_);
  std::vector<std::string> out;
  for (const auto& [serial, ids] : by_serial_) out.push_back(serial);
  return out;
}

MediaArtifact EventStore::add_media(const std::string& artifact_id, const std::string& session_id,
                                    MediaKind kind, std::int64_t captured_at_ms,
                                    const std::vector<std::uint8_t>& bytes) {
  if (!is_safe_id(artifact_id)) throw InvalidEvent("artifact_id is not a valid id");
  if (!is_safe_id(session_id)) throw InvalidEvent("session_id is not a valid id");
  if (captured_at_ms < 0) throw InvalidEvent("captured_at_ms is negative");

  MediaArtifact a;
  a.artifact_id = artifact_id;
  a.session_id = session_id;
  a.kind = kind;
  a.captured_at_ms = captured_at_ms;
  a.byte_size = bytes.size();
  a.path = std::string(kMediaDir) + "/" + artifact_id;

  std::lock_guard lock(media_mu_);
  if (auto it = media_.find(artifact_id); it != media_.end()) {
    if (it->second == a) return a;
    throw EventConflict("artifact " + artifact_id + " already stored with different metadata");
  }
  replace_durable(root_ / a.path, reinterpret_cast<const char*>(bytes.data()), bytes.size());
  append_durable(root_ / kMediaIndexFile,
                 to_json(a).dump(-1, ' ', false, Json::error_handler_t::replace) + "\n");
  media_[artifact_id] = a;
  return a;
}

std::vector<MediaArtifact> EventStore::media() const {
  std::lock_guard lock(media_mu_);
  std::vector<MediaArtifact> out;
  for (const auto& [id, a] : media_) out.push_back(a);
  return out;
}

std::optional<MediaArtifact> EventStore::find_media(const std::string& artifact_id) const {
  std::lock_guard lock(media_mu_);
  auto it = media_.find(artifact_id);
  if (it == media_.end()) return std::nullopt;
  return it->second;
}

void EventStore::rewrite_media_index_locked() {
  std::string text;
  for (const auto& [id, a] : media_) {
    text += to_json(a).dump(-1, ' ', false, Json::error_handler_t::replace);
    text += '\n';
  }
  replace_durable(root_ / kMediaIndexFile, text.data(), text.size());
}

std::vector<MediaArtifact> EventStore::retention_sweep(std::int64_t now_ms, int horizon_days) {
  if (horizon_days < 0 || horizon_days > kRetentionHorizonDays) {
    throw std::invalid_argument("retention horizon must be within [0, 183] days");
  }
  const std::int64_t cutoff = now_ms - static_cast<std::int64_t>(horizon_days) * kMsPerDay;

  std::lock_guard lock(media_mu_);
  std::vector<MediaArtifact> pruned;
  for (const auto& [id, a] : media_) {
    if (a.kind == MediaKind::VideoSegment && a.captured_at_ms < cutoff) pruned.push_back(a);
  }
  if (pruned.empty()) return pruned;
  for (const auto& a : pruned) media_.erase(a.artifact_id);
  rewrite_media_index_locked();
  for (const auto& a : pruned) {
    std::error_code ec;
    fs::remove(root_ / a.path, ec);
  }
  return pruned;
}

}  // namespace asmctl::logbook
