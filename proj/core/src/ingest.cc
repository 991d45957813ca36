#include "wsnsync/ingest.h"

#include <atomic>
#include <charconv>
#include <fstream>
#include <mutex>
#include <thread>

#include "httplib.h"
#include "wsnsync/errors.h"

namespace wsnsync {

namespace {

constexpr const char* kFormContentType = "application/x-www-form-urlencoded";

template <typename Int>
bool parse_int(std::string_view text, Int& out) {
  if (text.empty() || text.front() == '+') return false;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

IngestResponse bad_request(const std::string& why) { return {400, "bad request: " + why}; }

}  // namespace

std::string encode_ingest_form(const Packet& p) {
  std::string body = "node_id=" + p.node_id();
  body += "&record_id=" + std::to_string(p.record_id().value);
  body += "&temperature=" + format_tenths(p.sample().temperature_tenths());
  body += "&humidity=" + format_tenths(p.sample().humidity_tenths());
  body += "&stamped_at=" + std::to_string(p.stamped_at().seconds);
  return body;
}

FormFields decode_form(std::string_view body) {
  httplib::Params params;
  httplib::detail::parse_query_text(std::string(body), params);
  FormFields out;
  for (const auto& [k, v] : params) out[k] = v;
  return out;
}

IngestResponse handle_ingest(const FormFields& fields, ServerStore& store) {
  auto field = [&](const char* name) -> const std::string* {
    auto it = fields.find(name);
    return it == fields.end() ? nullptr : &it->second;
  };
  const std::string* node = field("node_id");
  const std::string* rid = field("record_id");
  const std::string* temp = field("temperature");
  const std::string* hum = field("humidity");
  const std::string* at = field("stamped_at");
  if (!node || !rid || !temp || !hum || !at) {
    return bad_request("missing field");
  }
  if (!valid_node_id(*node)) return bad_request("node_id");
  std::uint64_t id = 0;
  if (!parse_int(*rid, id) || id == 0) return bad_request("record_id");
  int t = 0;
  int h = 0;
  if (!parse_tenths(*temp, t)) return bad_request("temperature");
  if (!parse_tenths(*hum, h)) return bad_request("humidity");
  std::int64_t seconds = 0;
  if (!parse_int(*at, seconds)) return bad_request("stamped_at");

  try {
    Packet p = make_packet(*node, RecordId{id}, SensorSample::from_tenths(t, h), Timestamp{seconds});
    switch (store.insert(p)) {
      case InsertOutcome::kInserted:
        return {200, "inserted"};
      case InsertOutcome::kDuplicateIgnored:
        return {200, "duplicate"};
    }
  } catch (const RangeError& e) {
    return bad_request(e.what());
  } catch (const IdError& e) {
    return bad_request(e.what());
  } catch (const ConflictError& e) {
    return {409, std::string("conflict: ") + e.what()};
  }
  return {500, "unreachable"};
}

IngestResponse handle_ids(std::string_view node_id, const ServerStore& store) {
  const auto ids = store.ids(node_id);
  if (ids.empty() && !store.empty()) {
    return {404, "unknown node"};
  }
  std::string body;
  for (RecordId id : ids) {
    body += std::to_string(id.value);
    body += '\n';
  }
  return {200, std::move(body)};
}

struct IngestServer::Impl {
  explicit Impl(ServerStore& s) : store(s) {}

  ServerStore& store;
  httplib::Server server;
  std::thread thread;
  std::mutex log_mu;
  std::ofstream log;
  std::atomic<std::uint64_t> requests{0};
  int port = -1;
};

IngestServer::IngestServer(ServerStore& store) : impl_(std::make_unique<Impl>(store)) {
  Impl* impl = impl_.get();
  // httplib's default also sets SO_REUSEPORT, which would let a second server
  // silently share a busy port.
  impl->server.set_socket_options([](socket_t sock) {
    int yes = 1;
    ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  impl->server.set_tcp_nodelay(true);
  impl->server.Post("/ingest", [impl](const httplib::Request& req, httplib::Response& res) {
    ++impl->requests;
    {
      std::lock_guard lock(impl->log_mu);
      if (impl->log.is_open()) {
        impl->log << req.body << '\n';
        impl->log.flush();
      }
    }
    FormFields fields;
    for (const auto& [k, v] : req.params) fields[k] = v;
    if (fields.empty() && !req.body.empty()) fields = decode_form(req.body);
    IngestResponse r = handle_ingest(fields, impl->store);
    res.status = r.status;
    res.set_content(r.body, "text/plain");
  });
  impl->server.Get("/ids", [impl](const httplib::Request& req, httplib::Response& res) {
    ++impl->requests;
    if (!req.has_param("node")) {
      res.status = 400;
      res.set_content("bad request: node", "text/plain");
      return;
    }
    IngestResponse r = handle_ids(req.get_param_value("node"), impl->store);
    res.status = r.status;
    res.set_content(r.body, "text/plain");
  });
  impl->server.Get("/health", [impl](const httplib::Request&, httplib::Response& res) {
    ++impl->requests;
    res.set_content("ok", "text/plain");
  });
}

IngestServer::~IngestServer() { stop(); }

void IngestServer::set_request_log(const std::filesystem::path& path) {
  std::lock_guard lock(impl_->log_mu);
  impl_->log.close();
  impl_->log.open(path, std::ios::binary | std::ios::app);
  if (!impl_->log) {
    throw IoError("cannot open request log " + path.string());
  }
}

int IngestServer::start(const std::string& host, int port) {
  int bound = -1;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else if (impl_->server.bind_to_port(host, port)) {
    bound = port;
  }
  if (bound <= 0) {
    throw IoError("cannot bind " + host + ":" + std::to_string(port));
  }
  impl_->port = bound;
  impl_->thread = std::thread([impl = impl_.get()] { impl->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void IngestServer::listen_blocking(const std::string& host, int port) {
  if (!impl_->server.bind_to_port(host, port)) {
    throw IoError("cannot bind " + host + ":" + std::to_string(port));
  }
  impl_->port = port;
  impl_->server.listen_after_bind();
}

void IngestServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

int IngestServer::port() const { return impl_->port; }

std::uint64_t IngestServer::requests() const { return impl_->requests.load(); }

struct IngestClient::Impl {
  Impl(const std::string& host, int port) : client(host, port) {
    client.set_keep_alive(true);
    client.set_tcp_nodelay(true);
    client.set_connection_timeout(2, 0);
    client.set_read_timeout(10, 0);
  }
  httplib::Client client;
};

IngestClient::IngestClient(const std::string& host, int port)
    : impl_(std::make_unique<Impl>(host, port)) {}

IngestClient::~IngestClient() = default;

IngestResponse IngestClient::post_form(const std::string& body) {
  auto res = impl_->client.Post("/ingest", body, kFormContentType);
  if (!res) {
    throw IoError("POST /ingest failed: " + httplib::to_string(res.error()));
  }
  return {res->status, res->body};
}

IngestResponse IngestClient::get_ids(const std::string& node_id) {
  auto res = impl_->client.Get("/ids", httplib::Params{{"node", node_id}}, httplib::Headers{});
  if (!res) {
    throw IoError("GET /ids failed: " + httplib::to_string(res.error()));
  }
  return {res->status, res->body};
}

bool IngestClient::healthy() {
  auto res = impl_->client.Get("/health");
  return res && res->status == 200 && res->body == "ok";
}

std::vector<IngestResponse> replay_request_log(const std::filesystem::path& path,
                                               ServerStore& store) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open request log " + path.string());
  std::vector<IngestResponse> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    out.push_back(handle_ingest_form(line, store));
  }
  return out;
}

}  // namespace wsnsync
