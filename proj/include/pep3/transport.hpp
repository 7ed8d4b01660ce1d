#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "pep3/schnorr.hpp"
#include "pep3/wire.hpp"

namespace pep3 {

enum class Role : std::uint8_t { Peer, Metering, Storage, Researcher, Investigator };

std::string_view role_name(Role r);
std::optional<Role> role_from_name(std::string_view name);

struct NodeInfo {
  std::string id;  // "A".."E" for peers
  Role role = Role::Peer;
  GroupElement auth_public;
};

// Static authentication keys of every node; stands in for a PKI.
class Directory {
 public:
  void add(NodeInfo info);
  const NodeInfo* find(std::string_view id) const;
  const NodeInfo& at(std::string_view id) const;  // throws UnknownParty
  std::vector<NodeInfo> nodes() const;

 private:
  std::map<std::string, NodeInfo, std::less<>> nodes_;
};

// Per-connection server state.
struct Session {
  std::optional<std::string> client;
  std::string pending_client;
  Hash32 client_nonce{};
  Hash32 server_nonce{};
  bool challenged = false;
};

// Server side of the framed protocol. Runs the handshake itself and passes
// every later frame to handle() with the authenticated client id.
class Service {
 public:
  Service(std::string id, SigningKey key, const Directory& directory);
  virtual ~Service() = default;

  const std::string& id() const { return id_; }
  // Never throws; failures become Error frames.
  Frame dispatch(Session& session, const Frame& request);
  Bytes dispatch_bytes(Session& session, std::span<const std::uint8_t> request);

 protected:
  virtual Frame handle(const std::string& client, const Frame& request) = 0;
  const Directory& directory() const { return directory_; }

 private:
  std::string id_;
  SigningKey key_;
  const Directory& directory_;
};

class Connection {
 public:
  virtual ~Connection() = default;
  // Sends one encoded frame and returns the encoded reply.
  virtual Bytes exchange(const Bytes& frame) = 0;
};

// Calls straight into a Service, still through the encoded bytes.
class InMemoryConnection final : public Connection {
 public:
  InMemoryConnection(Service& service, std::shared_ptr<std::atomic<bool>> up = nullptr)
      : service_(service), up_(std::move(up)) {}
  Bytes exchange(const Bytes& frame) override;

 private:
  Service& service_;
  std::shared_ptr<std::atomic<bool>> up_;
  Session session_;
};

class TcpConnection final : public Connection {
 public:
  // Throws PeerUnreachable.
  static std::unique_ptr<TcpConnection> open(const std::string& host, std::uint16_t port);
  ~TcpConnection() override;
  Bytes exchange(const Bytes& frame) override;

 private:
  explicit TcpConnection(int fd) : fd_(fd) {}
  int fd_;
};

// Accept loop plus one thread per connection.
class TcpServer {
 public:
  TcpServer(Service& service, const std::string& host, std::uint16_t port);  // port 0 picks one
  ~TcpServer();
  std::uint16_t port() const { return port_; }
  void stop();

 private:
  void accept_loop();
  void serve(int fd);

  Service& service_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> stopping_{false};
  std::thread acceptor_;
  std::mutex mu_;
  std::vector<std::thread> workers_;
  std::vector<int> client_fds_;
};

// Resolves a node id to a fresh connection.
class Connector {
 public:
  virtual ~Connector() = default;
  virtual std::unique_ptr<Connection> connect(std::string_view node) = 0;  // throws PeerUnreachable
};

// Client side of one authenticated connection.
class RpcChannel {
 public:
  // Runs the handshake; throws Unauthenticated if the server key is wrong.
  RpcChannel(std::unique_ptr<Connection> conn, const std::string& self_id, const SigningKey& self_key,
             const std::string& server_id, const GroupElement& server_public, RandomSource& rng);
  // Throws the remote Error for an Error frame, Malformed for an unexpected tag.
  Bytes call(MsgTag tag, Bytes payload, MsgTag expect);
  const std::string& server_id() const { return server_id_; }

 private:
  Frame roundtrip(const Frame& f);
  std::unique_ptr<Connection> conn_;
  std::string server_id_;
};

// Reads one frame from a socket; returns nullopt on orderly close.
std::optional<Bytes> read_frame_bytes(int fd);
void write_all(int fd, std::span<const std::uint8_t> data);

// "host:port" helper; throws Config.
std::pair<std::string, std::uint16_t> split_endpoint(std::string_view endpoint);

}  // namespace pep3
