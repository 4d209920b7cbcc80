#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "asmctl/logbook/work_event.hpp"

namespace asmctl::logbook {

// The event skips ahead of the stored log. The sender should replay from
// expected_event_id.
class GapDetected : public std::runtime_error {
 public:
  GapDetected(std::string session_id, std::uint64_t expected, std::uint64_t got);
  const std::string& session_id() const { return session_id_; }
  std::uint64_t expected_event_id() const { return expected_; }
  std::uint64_t received_event_id() const { return got_; }

 private:
  std::string session_id_;
  std::uint64_t expected_;
  std::uint64_t got_;
};

// An already-stored event_id arrived with different content.
class EventConflict : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class StoreError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class AppendStatus { Stored, Duplicate };

enum class MediaKind { KeyFrame, VideoSegment };

const char* to_string(MediaKind kind);
std::optional<MediaKind> media_kind_from_string(std::string_view name);

struct MediaArtifact {
  std::string artifact_id;
  std::string session_id;
  std::int64_t captured_at_ms = 0;
  MediaKind kind = MediaKind::KeyFrame;
  std::uint64_t byte_size = 0;
  std::string path;  // relative to the store root

  bool operator==(const MediaArtifact&) const = default;
};

inline constexpr int kRetentionHorizonDays = 183;
inline constexpr std::int64_t kMsPerDay = 86'400'000;

// Append-only event store rooted at a directory:
//
//   <root>/sessions/<session_id>.jsonl   one WorkEvent per line
//   <root>/index.jsonl                   {"serial", "session_id", "workcell_id"}
//   <root>/media/<artifact_id>           artifact bytes
//   <root>/media/index.jsonl             MediaArtifact records
//
// Appends to one session are serialized; different sessions append in
// parallel. Every append is fsync'd before it returns.
class EventStore {
 public:
  // Creates the layout if absent. Reopening recovers per-session counters
  // from the logs and trims a torn final line left by a crash.
  explicit EventStore(std::filesystem::path root);
  ~EventStore();

  EventStore(const EventStore&) = delete;
  EventStore& operator=(const EventStore&) = delete;

  const std::filesystem::path& root() const { return root_; }

  // Rules: event 1 must be SessionBegin and SessionBegin only appears as
  // event 1; later events carry the same workcell_id and product_serial;
  // timestamps never decrease; nothing follows SessionEnd. A repeated
  // event_id with identical content returns Duplicate without writing.
  // Throws InvalidEvent, GapDetected, EventConflict, StoreError.
  AppendStatus append(const WorkEvent& event);

  // Last stored event_id for the session, 0 if unknown.
  std::uint64_t last_event_id(const std::string& session_id) const;

  // Complete lines only, so a concurrent append is either fully visible or
  // not at all. Empty for an unknown session.
  std::vector<WorkEvent> events(const std::string& session_id) const;
  bool has_session(const std::string& session_id) const;
  std::vector<std::string> sessions_for_serial(const std::string& serial) const;
  std::vector<std::string> serials() const;

  // Writes the bytes to media/<artifact_id> and records the metadata.
  // Re-adding an existing id with the same metadata is a no-op.
  MediaArtifact add_media(const std::string& artifact_id, const std::string& session_id,
                          MediaKind kind, std::int64_t captured_at_ms,
                          const std::vector<std::uint8_t>& bytes);
  std::vector<MediaArtifact> media() const;
  std::optional<MediaArtifact> find_media(const std::string& artifact_id) const;

  // Deletes VideoSegments captured before now - horizon. KeyFrames and
  // events are never touched. Returns what was pruned, in id order.
  // Throws std::invalid_argument unless 0 <= horizon_days <= 183.
  std::vector<MediaArtifact> retention_sweep(std::int64_t now_ms,
                                             int horizon_days = kRetentionHorizonDays);

 private:
  struct SessionLog {
    std::mutex mu;
    std::uint64_t last_id = 0;
    std::int64_t last_ts = 0;
    bool ended = false;
    std::string workcell_id;
    std::string serial;
  };

  std::filesystem::path session_path(const std::string& session_id) const;
  std::shared_ptr<SessionLog> log_for(const std::string& session_id, bool create);
  void recover_session(const std::filesystem::path& file);
  void write_index_entry(const WorkEvent& begin);
  void rewrite_media_index_locked();

  std::filesystem::path root_;

  mutable std::mutex sessions_mu_;
  std::map<std::string, std::shared_ptr<SessionLog>> sessions_;
  std::map<std::string, std::vector<std::string>> by_serial_;

  mutable std::mutex media_mu_;
  std::map<std::string, MediaArtifact> media_;
};

Json to_json(const MediaArtifact& artifact);

}  // namespace asmctl::logbook
