#include "pep3/transport.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "pep3/random.hpp"

namespace pep3 {

std::string_view role_name(Role r) {
  switch (r) {
    case Role::Peer: return "peer";
    case Role::Metering: return "metering";
    case Role::Storage: return "storage";
    case Role::Researcher: return "researcher";
    case Role::Investigator: return "investigator";
  }
  return "unknown";
}

std::optional<Role> role_from_name(std::string_view name) {
  for (auto r : {Role::Peer, Role::Metering, Role::Storage, Role::Researcher, Role::Investigator})
    if (role_name(r) == name) return r;
  return std::nullopt;
}

void Directory::add(NodeInfo info) {
  if (info.id.empty()) throw Error(ErrorCode::Config, "empty node id");
  auto id = info.id;
  nodes_[id] = std::move(info);
}

const NodeInfo* Directory::find(std::string_view id) const {
  auto it = nodes_.find(id);
  return it == nodes_.end() ? nullptr : &it->second;
}

const NodeInfo& Directory::at(std::string_view id) const {
  auto p = find(id);
  if (!p) throw Error(ErrorCode::UnknownParty, "unknown node " + std::string(id));
  return *p;
}

std::vector<NodeInfo> Directory::nodes() const {
  std::vector<NodeInfo> out;
  for (const auto& [_, n] : nodes_) out.push_back(n);
  return out;
}

Service::Service(std::string id, SigningKey key, const Directory& directory)
    : id_(std::move(id)), key_(std::move(key)), directory_(directory) {}

Frame Service::dispatch(Session& session, const Frame& request) {
  try {
    switch (request.tag) {
      case MsgTag::Hello: {
        const auto hello = Hello::decode(request.payload);
        directory_.at(hello.client_id);
        session = Session{};
        session.pending_client = hello.client_id;
        session.client_nonce = hello.client_nonce;
        secure_random().fill(session.server_nonce);
        session.challenged = true;
        Challenge c{id_, session.server_nonce, {}};
        c.signature = sign(key_, kTagAuthServer,
                           server_auth_message(hello.client_nonce, session.server_nonce, hello.client_id),
                           secure_random());
        return {MsgTag::Challenge, c.encode()};
      }
      case MsgTag::AuthResponse: {
        if (!session.challenged) throw Error(ErrorCode::Unauthenticated, "no challenge outstanding");
        const auto resp = AuthResponse::decode(request.payload);
        const auto& info = directory_.at(session.pending_client);
        session.challenged = false;
        if (!verify_signature(info.auth_public, kTagAuthClient,
                              client_auth_message(session.server_nonce, session.client_nonce, id_),
                              resp.signature))
          throw Error(ErrorCode::Unauthenticated, "client signature rejected");
        session.client = session.pending_client;
        return {MsgTag::AuthOk, {}};
      }
      default:
        if (!session.client) throw Error(ErrorCode::Unauthenticated, "handshake required");
        return handle(*session.client, request);
    }
  } catch (const Error& e) {
    return error_frame(e);
  } catch (const std::exception& e) {
    return error_frame(Error(ErrorCode::InvalidArgument, e.what()));
  }
}

Bytes Service::dispatch_bytes(Session& session, std::span<const std::uint8_t> request) {
  Frame f;
  try {
    f = decode_frame(request);
  } catch (const Error& e) {
    return encode_frame(error_frame(e));
  }
  return encode_frame(dispatch(session, f));
}

Bytes InMemoryConnection::exchange(const Bytes& frame) {
  if (up_ && !up_->load()) throw Error(ErrorCode::PeerUnreachable, service_.id() + " is down");
  return service_.dispatch_bytes(session_, frame);
}

void write_all(int fd, std::span<const std::uint8_t> data) {
  std::size_t off = 0;
  while (off < data.size()) {
    const auto n = ::send(fd, data.data() + off, data.size() - off, MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorCode::Io, std::string("send: ") + std::strerror(errno));
    }
    off += static_cast<std::size_t>(n);
  }
}

namespace {

// Returns false on EOF before any byte.
bool read_exact(int fd, std::uint8_t* out, std::size_t len, bool allow_eof) {
  std::size_t off = 0;
  while (off < len) {
    const auto n = ::recv(fd, out + off, len - off, 0);
    if (n == 0) {
      if (allow_eof && off == 0) return false;
      throw Error(ErrorCode::Io, "connection closed mid-frame");
    }
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorCode::Io, std::string("recv: ") + std::strerror(errno));
    }
    off += static_cast<std::size_t>(n);
  }
  return true;
}

}  // namespace

std::optional<Bytes> read_frame_bytes(int fd) {
  Bytes buf(4);
  if (!read_exact(fd, buf.data(), 4, true)) return std::nullopt;
  const std::uint32_t len = (std::uint32_t{buf[0]} << 24) | (std::uint32_t{buf[1]} << 16) |
                            (std::uint32_t{buf[2]} << 8) | buf[3];
  if (len == 0 || len > kMaxFrameBytes) throw Error(ErrorCode::Malformed, "frame length");
  buf.resize(4 + len);
  read_exact(fd, buf.data() + 4, len, false);
  return buf;
}

std::unique_ptr<TcpConnection> TcpConnection::open(const std::string& host, std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &res) != 0)
    throw Error(ErrorCode::PeerUnreachable, "cannot resolve " + host);
  int fd = -1;
  for (auto* ai = res; ai; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) throw Error(ErrorCode::PeerUnreachable, "cannot connect to " + host + ":" + std::to_string(port));
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return std::unique_ptr<TcpConnection>(new TcpConnection(fd));
}

TcpConnection::~TcpConnection() {
  if (fd_ >= 0) ::close(fd_);
}

Bytes TcpConnection::exchange(const Bytes& frame) {
  try {
    write_all(fd_, frame);
    auto reply = read_frame_bytes(fd_);
    if (!reply) throw Error(ErrorCode::PeerUnreachable, "connection closed");
    return std::move(*reply);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Io) throw Error(ErrorCode::PeerUnreachable, e.what());
    throw;
  }
}

TcpServer::TcpServer(Service& service, const std::string& host, std::uint16_t port) : service_(service) {
  listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listen_fd_ < 0) throw Error(ErrorCode::Io, "socket");
  int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(listen_fd_);
    throw Error(ErrorCode::Config, "listen address must be an IPv4 literal: " + host);
  }
  if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(listen_fd_, 64) != 0) {
    const std::string why = std::strerror(errno);
    ::close(listen_fd_);
    throw Error(ErrorCode::Io, "bind " + host + ":" + std::to_string(port) + ": " + why);
  }
  socklen_t len = sizeof addr;
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  acceptor_ = std::thread([this] { accept_loop(); });
}

TcpServer::~TcpServer() { stop(); }

void TcpServer::stop() {
  if (stopping_.exchange(true)) return;
  ::shutdown(listen_fd_, SHUT_RDWR);
  ::close(listen_fd_);
  if (acceptor_.joinable()) acceptor_.join();
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(mu_);
    for (int fd : client_fds_) ::shutdown(fd, SHUT_RDWR);
    workers.swap(workers_);
  }
  for (auto& t : workers) t.join();
}

void TcpServer::accept_loop() {
  while (!stopping_) {
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (stopping_) return;
      if (errno == EINTR || errno == ECONNABORTED) continue;
      return;
    }
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    std::lock_guard lock(mu_);
    client_fds_.push_back(fd);
    workers_.emplace_back([this, fd] { serve(fd); });
  }
}

void TcpServer::serve(int fd) {
  Session session;
  try {
    while (auto frame = read_frame_bytes(fd)) write_all(fd, service_.dispatch_bytes(session, *frame));
  } catch (const Error&) {
  }
  std::lock_guard lock(mu_);
  std::erase(client_fds_, fd);
  ::close(fd);
}

RpcChannel::RpcChannel(std::unique_ptr<Connection> conn, const std::string& self_id, const SigningKey& self_key,
                       const std::string& server_id, const GroupElement& server_public, RandomSource& rng)
    : conn_(std::move(conn)), server_id_(server_id) {
  Hello hello{self_id, {}};
  rng.fill(hello.client_nonce);
  const auto reply = roundtrip({MsgTag::Hello, hello.encode()});
  if (reply.tag != MsgTag::Challenge) throw Error(ErrorCode::Malformed, "expected challenge");
  const auto ch = Challenge::decode(reply.payload);
  if (ch.server_id != server_id ||
      !verify_signature(server_public, kTagAuthServer,
                        server_auth_message(hello.client_nonce, ch.server_nonce, self_id), ch.signature))
    throw Error(ErrorCode::Unauthenticated, "server " + server_id + " failed to authenticate");
  AuthResponse resp{sign(self_key, kTagAuthClient, client_auth_message(ch.server_nonce, hello.client_nonce, server_id),
                         rng)};
  const auto ok = roundtrip({MsgTag::AuthResponse, resp.encode()});
  if (ok.tag != MsgTag::AuthOk) throw Error(ErrorCode::Malformed, "expected auth-ok");
}

Frame RpcChannel::roundtrip(const Frame& f) {
  auto reply = decode_frame(conn_->exchange(encode_frame(f)));
  if (reply.tag == MsgTag::Error) throw_error_frame(reply);
  return reply;
}

Bytes RpcChannel::call(MsgTag tag, Bytes payload, MsgTag expect) {
  auto reply = roundtrip({tag, std::move(payload)});
  if (reply.tag != expect) throw Error(ErrorCode::Malformed, "unexpected reply tag");
  return std::move(reply.payload);
}

std::pair<std::string, std::uint16_t> split_endpoint(std::string_view endpoint) {
  const auto colon = endpoint.rfind(':');
  if (colon == std::string_view::npos) throw Error(ErrorCode::Config, "endpoint needs host:port");
  const std::string port_text(endpoint.substr(colon + 1));
  int port = 0;
  try {
    std::size_t used = 0;
    port = std::stoi(port_text, &used);
    if (used != port_text.size()) port = -1;
  } catch (const std::exception&) {
    port = -1;
  }
  if (port < 0 || port > 65535) throw Error(ErrorCode::Config, "bad port in " + std::string(endpoint));
  return {std::string(endpoint.substr(0, colon)), static_cast<std::uint16_t>(port)};
}

}  // namespace pep3
