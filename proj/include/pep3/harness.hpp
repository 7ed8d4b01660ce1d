#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pep3/parties.hpp"
#include "pep3/peer.hpp"
#include "pep3/storage.hpp"
#include "pep3/transport.hpp"

namespace pep3 {

struct NodeConfig {
  std::string id;
  Role role = Role::Peer;
  std::string endpoint;  // "host:port"; empty for parties that serve nothing
  GroupElement auth_public;
};

// Cluster description shared by every process. Validation throws Config.
struct ClusterConfig {
  std::array<NodeConfig, kPeerCount> peers;
  std::vector<NodeConfig> parties;
  GroupElement ca_public;
  double sampling = 0.01;
  std::optional<ActiveSet> active;
  std::string state_dir;  // absolute once loaded

  void validate() const;
  Directory directory() const;
  const NodeConfig& node(const std::string& id) const;  // throws UnknownParty
  std::string party_with_role(Role r) const;             // first match; throws Config

  std::string to_json() const;
  static ClusterConfig from_json(const std::string& text, const std::string& base_dir = ".");
  static ClusterConfig load(const std::string& path);  // relative state_dir resolves against the file
  void save(const std::string& path) const;
};

// Secret half of the deployment, kept in <state_dir>/keys.json. A demo
// convenience: real nodes would each hold only their own entries.
struct Keyring {
  std::map<std::string, SigningKey> auth;  // node id -> authentication key
  SigningKey ca;
  std::array<std::array<std::uint8_t, 32>, kPeerCount> file_keys{};

  const SigningKey& at(const std::string& id) const;  // throws Config
  std::string to_json() const;
  static Keyring from_json(const std::string& text);
  static Keyring load(const std::string& state_dir);
  void save(const std::string& state_dir) const;
};

std::string master_path(const std::string& state_dir, PeerId p);
std::string sf_db_path(const std::string& state_dir);

struct SetupOptions {
  std::string state_dir;
  std::string host = "127.0.0.1";
  std::uint16_t base_port = 7100;  // peers A..E on base+1..base+5, sf on base+10
  double sampling = 0.01;
  std::optional<ActiveSet> active;
  std::array<SetupFault, kPeerCount> faults{};
};

// Runs the setup exchange, generates node keys, persists master secrets and
// writes the config. Throws MismatchAbort (nothing is written) on any
// inconsistency.
ClusterConfig setup_cluster(const std::string& config_path, const SetupOptions& opts, RandomSource& rng = secure_random());

// Routes node ids to in-process services through encoded frames.
class MemoryConnector final : public Connector {
 public:
  void attach(const std::string& id, Service& service);
  void set_down(const std::string& id, bool down);
  std::unique_ptr<Connection> connect(std::string_view node) override;

 private:
  struct Slot {
    Service* service;
    std::shared_ptr<std::atomic<bool>> up;
  };
  std::mutex mu_;
  std::map<std::string, Slot, std::less<>> slots_;
};

// Routes node ids to "host:port" endpoints.
class TcpConnector final : public Connector {
 public:
  void set_endpoint(const std::string& id, std::string endpoint);
  std::unique_ptr<Connection> connect(std::string_view node) override;

 private:
  std::map<std::string, std::string, std::less<>> endpoints_;
};

std::unique_ptr<TcpConnector> tcp_connector(const ClusterConfig& config);

// Enrols `id` and applies the config's sampling and active override.
std::unique_ptr<PartyClient> connect_party(const ClusterConfig& config, const Keyring& keys,
                                           const Directory& directory, Connector& connector, const std::string& id,
                                           RandomSource& rng = secure_random());

struct ClusterOptions {
  bool tcp = false;  // serve every node on an ephemeral loopback port
  std::array<PeerFaults, kPeerCount> faults{};
  std::optional<std::string> sf_db;  // memory-only table when empty
};

// Five peers plus the storage facility in this process.
class LocalCluster {
 public:
  LocalCluster(ClusterConfig config, Keyring keys, std::array<MasterSecrets, kPeerCount> secrets,
               ClusterOptions opts = {});
  ~LocalCluster();
  LocalCluster(const LocalCluster&) = delete;
  LocalCluster& operator=(const LocalCluster&) = delete;

  // Deterministic keys and setup from a seed, nothing on disk.
  static std::unique_ptr<LocalCluster> ephemeral(std::uint64_t seed, ClusterOptions opts = {});
  // Keys, master secrets and the flow table from the config's state dir.
  static std::unique_ptr<LocalCluster> from_state(const ClusterConfig& config, ClusterOptions opts = {});

  const ClusterConfig& config() const { return config_; }
  ClusterConfig& config() { return config_; }
  const Keyring& keys() const { return keys_; }
  const Directory& directory() const { return directory_; }
  Connector& connector() { return *connector_; }
  PeerNode& peer(PeerId p) { return *peers_[peer_index(p)]; }
  StorageNode& storage() { return *storage_; }
  FlowTable& table() { return *table_; }
  CertificationAuthority& ca() { return *ca_; }
  void set_down(PeerId p, bool down);

  std::unique_ptr<PartyClient> party(const std::string& id, RandomSource& rng = secure_random());
  StorageClient storage_client(PartyClient& client);

 private:
  ClusterConfig config_;
  Keyring keys_;
  Directory directory_;
  std::array<std::unique_ptr<PeerNode>, kPeerCount> peers_;
  std::unique_ptr<FlowTable> table_;
  std::unique_ptr<StorageNode> storage_;
  std::unique_ptr<CertificationAuthority> ca_;
  MemoryConnector memory_;
  std::unique_ptr<TcpConnector> tcp_;
  Connector* connector_ = nullptr;
  std::vector<std::unique_ptr<TcpServer>> servers_;
};

// ---------------------------------------------------------------------------
// End-to-end operations shared by the CLI and the tests.

struct PseudonymiseReport {
  std::size_t flows = 0;
  std::size_t stored = 0;
  MeteringStats metering;
  SamplingStats sampling;
  double seconds = 0;
};

PseudonymiseReport pseudonymise_flows(PartyClient& mp, StorageClient& sf, CertificationAuthority& ca,
                                      const std::string& sf_id, const std::vector<PlainFlow>& flows,
                                      std::vector<EncryptedFlow>* encrypted = nullptr, std::size_t batch = 4096);

Retrieval retrieve_as(PartyClient& client, StorageClient& sf, CertificationAuthority& ca, const std::string& sf_id,
                      const std::string& query, const std::vector<GroupElement>& own_pseudonyms);

// ---------------------------------------------------------------------------
// Adversary experiments.

enum class Misbehaviour { CorruptResult, WrongEnrolmentShare, BadSetupPublic, RefuseProof };

std::string_view misbehaviour_name(Misbehaviour m);
std::optional<Misbehaviour> misbehaviour_from_name(std::string_view name);

struct AdversaryScript {
  std::vector<PeerId> peers;  // at most two
  Misbehaviour kind = Misbehaviour::CorruptResult;
  double sampling = 1.0;
  std::uint64_t ops = 1;           // adversary operations per trial
  std::uint64_t trials = 1;
  std::uint64_t honest_first = 0;  // trigger: operations served honestly before misbehaving
  std::uint64_t seed = 1;

  void validate() const;  // throws InvalidArgument
};

struct AdversaryReport {
  AdversaryScript script;
  bool detected = false;
  std::vector<PeerId> identified;         // peers named by the detecting party
  std::string detector;                   // party id, or "setup"
  std::optional<std::uint64_t> first_op;  // operations until the first detection, 1-based
  std::uint64_t detected_trials = 0;
  double expected_rate = 0;
  double empirical_rate = 0;
  double sigma = 0;  // standard deviation of the empirical rate
  bool within_3sigma = true;
  std::string note;

  std::string to_json() const;
  std::string to_text() const;
};

AdversaryReport run_adversary(const AdversaryScript& script);

// ---------------------------------------------------------------------------
// Benchmarks.

struct BenchEntry {
  std::string name;
  std::uint64_t iterations = 0;
  double micros = 0;  // mean per iteration
  OpCounters ops;     // per iteration
  std::optional<double> reference_micros;
};

struct BenchReport {
  std::string hardware;
  std::vector<BenchEntry> entries;
  std::size_t unique_addresses = 0;
  double pipeline_seconds = 0;
  double unique_per_minute = 0;
  std::vector<std::string> to_json_lines() const;
  std::string to_text() const;
};

BenchReport run_bench(std::size_t unique_addresses = 5000, std::uint64_t micro_iterations = 500, std::uint64_t seed = 7);

}  // namespace pep3
