#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "pep3/flow.hpp"
#include "pep3/query.hpp"
#include "pep3/transport.hpp"

namespace pep3 {

// Query output. P is the pseudonym representation: GroupElement inside the
// facility and at the requester after decryption, Cyphertext on the wire.
template <typename P>
struct ResultSet {
  using Value = std::variant<std::uint64_t, P>;
  std::vector<Column> columns;
  std::optional<std::uint64_t> count;
  std::vector<std::vector<Value>> rows;
};

Bytes encode_result(const ResultSet<Cyphertext>& r);
ResultSet<Cyphertext> decode_result(std::span<const std::uint8_t> in);  // throws Malformed

// Append-only table of stored flows with an in-memory index on both
// pseudonym columns. File layout: "PEP3SF01" then 101-byte rows.
// Writes are serialised; reads run concurrently.
class FlowTable {
 public:
  FlowTable() = default;                        // memory only
  explicit FlowTable(const std::string& path);  // loads existing rows; throws Io/Malformed
  FlowTable(const FlowTable&) = delete;
  FlowTable& operator=(const FlowTable&) = delete;

  std::size_t append(std::span<const StoredFlow> rows);
  std::size_t size() const;
  std::vector<StoredFlow> rows() const;
  ResultSet<GroupElement> evaluate(const Query& q, std::span<const GroupElement> args) const;

 private:
  void index(std::size_t i);

  mutable std::shared_mutex mu_;
  std::vector<StoredFlow> rows_;
  std::unordered_map<std::string, std::vector<std::uint32_t>> by_src_, by_dst_;
  std::optional<std::string> path_;
  std::ofstream log_;
};

// Storage facility service. Accepts ingest from metering parties and queries
// from researchers and investigators; pseudonym values leave the facility
// freshly encrypted under its own public key.
class StorageNode final : public Service {
 public:
  StorageNode(std::string id, SigningKey auth_key, const Directory& directory, Scalar encryption_key, FlowTable& table,
              RandomSource& rng = secure_random());

  std::size_t ingest(std::span<const EncryptedFlow> flows);
  ResultSet<Cyphertext> query(const std::string& text, std::span<const Cyphertext> args) const;
  FlowTable& table() { return table_; }

 protected:
  Frame handle(const std::string& client, const Frame& request) override;

 private:
  GroupElement open(const Cyphertext& c) const;

  Scalar key_;
  GroupElement public_;
  FlowTable& table_;
  RandomSource& rng_;
};

// Client side of the storage protocol.
class StorageClient {
 public:
  explicit StorageClient(RpcChannel channel) : ch_(std::move(channel)) {}
  std::uint64_t ingest(std::span<const EncryptedFlow> flows);
  ResultSet<Cyphertext> query(const std::string& text, std::span<const Cyphertext> args);

 private:
  RpcChannel ch_;
};

}  // namespace pep3
