#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "wsnsync/model.h"
#include "wsnsync/store.h"

namespace wsnsync {

// Status and body of one ingestion route.
struct IngestResponse {
  int status = 200;
  std::string body;

  friend bool operator==(const IngestResponse&, const IngestResponse&) = default;
};

using FormFields = std::map<std::string, std::string>;

// Wire form of a packet:
//   node_id=<id>&record_id=<n>&temperature=<t.t>&humidity=<h.h>&stamped_at=<s>
std::string encode_ingest_form(const Packet& p);
// application/x-www-form-urlencoded decoding; later duplicates win.
FormFields decode_form(std::string_view body);

// POST /ingest. 200 "inserted" | 200 "duplicate" | 400 on parse/range failure |
// 409 on identity conflict.
IngestResponse handle_ingest(const FormFields& fields, ServerStore& store);
inline IngestResponse handle_ingest_form(std::string_view body, ServerStore& store) {
  return handle_ingest(decode_form(body), store);
}

// GET /ids?node=<id>. Newline-terminated ascending ids. 404 when the node is
// unknown but the store holds other nodes; 200 "" for an empty store.
IngestResponse handle_ids(std::string_view node_id, const ServerStore& store);

// Loopback HTTP front end over a caller-owned store. Requests are handled on
// the server's worker threads; the store serializes the mutations.
class IngestServer {
 public:
  explicit IngestServer(ServerStore& store);
  ~IngestServer();

  IngestServer(const IngestServer&) = delete;
  IngestServer& operator=(const IngestServer&) = delete;

  // Appends every POST /ingest body, one per line, to `path`.
  void set_request_log(const std::filesystem::path& path);

  // Binds and starts serving on a background thread. Port 0 picks a free
  // port. Returns the bound port; throws IoError if binding fails.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  // Blocks the calling thread until stop() is called from elsewhere.
  void listen_blocking(const std::string& host, int port);
  void stop();

  int port() const;
  std::uint64_t requests() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Keep-alive client for one IngestServer.
class IngestClient {
 public:
  IngestClient(const std::string& host, int port);
  ~IngestClient();

  IngestClient(const IngestClient&) = delete;
  IngestClient& operator=(const IngestClient&) = delete;

  // Throws IoError when no HTTP response came back.
  IngestResponse post_form(const std::string& body);
  IngestResponse post(const Packet& p) { return post_form(encode_ingest_form(p)); }
  IngestResponse get_ids(const std::string& node_id);
  bool healthy();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Rebuilds a store from a request log by feeding every line through
// handle_ingest. Returns the per-line responses.
std::vector<IngestResponse> replay_request_log(const std::filesystem::path& path,
                                               ServerStore& store);

}  // namespace wsnsync
