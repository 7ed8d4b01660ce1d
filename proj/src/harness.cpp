#include "pep3/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "pep3/lizard.hpp"

namespace pep3 {
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string letter(PeerId p) { return std::string(1, peer_letter(p)); }

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  const auto parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
  std::ofstream out(path, std::ios::trunc);
  if (!out || !(out << text)) throw Error(ErrorCode::Io, "cannot write " + path);
}

GroupElement point_field(const json& j, const std::string& what) {
  if (!j.is_string()) throw Error(ErrorCode::Config, what + " must be a hex string");
  auto p = GroupElement::from_hex(j.get<std::string>());
  if (!p) throw Error(ErrorCode::Config, what + " is not a group element");
  return *p;
}

SigningKey key_field(const json& j, const std::string& what) {
  if (!j.is_string()) throw Error(ErrorCode::Config, what + " must be a hex string");
  auto k = SigningKey::from_secret_hex(j.get<std::string>());
  if (!k) throw Error(ErrorCode::Config, what + " is not a scalar");
  return *k;
}

const std::pair<const char*, Role> kDefaultParties[] = {{"mp", Role::Metering},
                                                        {"sf", Role::Storage},
                                                        {"researcher", Role::Researcher},
                                                        {"researcher-2", Role::Researcher},
                                                        {"investigator", Role::Investigator}};

// Fresh keys for the five peers and the default party roster.
std::pair<ClusterConfig, Keyring> fresh_deployment(RandomSource& rng, const std::string& host, std::uint16_t base_port,
                                                   bool endpoints) {
  ClusterConfig cfg;
  Keyring keys;
  for (auto p : kAllPeers) {
    const auto k = SigningKey::generate(rng);
    keys.auth.emplace(letter(p), k);
    cfg.peers[peer_index(p)] = {letter(p), Role::Peer,
                                endpoints ? host + ":" + std::to_string(base_port + 1 + peer_index(p)) : "",
                                k.public_key};
  }
  for (const auto& [id, role] : kDefaultParties) {
    const auto k = SigningKey::generate(rng);
    keys.auth.emplace(id, k);
    const bool serves = role == Role::Storage && endpoints;
    cfg.parties.push_back({id, role, serves ? host + ":" + std::to_string(base_port + 10) : "", k.public_key});
  }
  keys.ca = SigningKey::generate(rng);
  cfg.ca_public = keys.ca.public_key;
  for (auto& fk : keys.file_keys) rng.fill(fk);
  return {cfg, keys};
}

ActiveSet active_including(const std::vector<PeerId>& must) {
  std::set<PeerId> s(must.begin(), must.end());
  for (auto p : kAllPeers)
    if (s.size() < 3) s.insert(p);
  std::vector<PeerId> v(s.begin(), s.end());
  return {v[0], v[1], v[2]};
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

// ---------------------------------------------------------------------------
// Config

void ClusterConfig::validate() const {
  std::set<std::string> ids;
  for (std::size_t i = 0; i < peers.size(); ++i) {
    const auto& p = peers[i];
    if (p.id != letter(static_cast<PeerId>(i)))
      throw Error(ErrorCode::Config, "peers must be listed as A, B, C, D, E; got '" + p.id + "'");
    ids.insert(p.id);
  }
  for (const auto& p : parties) {
    if (p.id.empty() || p.id.size() > 64) throw Error(ErrorCode::Config, "party ids must be 1..64 characters");
    if (p.role == Role::Peer) throw Error(ErrorCode::Config, "party '" + p.id + "' cannot have the peer role");
    if (!ids.insert(p.id).second) throw Error(ErrorCode::Config, "duplicate node id '" + p.id + "'");
  }
  if (!(sampling >= 0.0 && sampling <= 1.0)) throw Error(ErrorCode::Config, "sampling must be in [0,1]");
}

Directory ClusterConfig::directory() const {
  Directory d;
  for (const auto& p : peers) d.add({p.id, Role::Peer, p.auth_public});
  for (const auto& p : parties) d.add({p.id, p.role, p.auth_public});
  return d;
}

const NodeConfig& ClusterConfig::node(const std::string& id) const {
  for (const auto& p : peers)
    if (p.id == id) return p;
  for (const auto& p : parties)
    if (p.id == id) return p;
  throw Error(ErrorCode::UnknownParty, "no node '" + id + "' in the config");
}

std::string ClusterConfig::party_with_role(Role r) const {
  for (const auto& p : parties)
    if (p.role == r) return p.id;
  throw Error(ErrorCode::Config, "no party with role " + std::string(role_name(r)));
}

std::string ClusterConfig::to_json() const {
  json j;
  j["state_dir"] = state_dir;
  j["sampling"] = sampling;
  j["active"] = active ? json(active_name(*active)) : json(nullptr);
  j["ca_public"] = ca_public.to_hex();
  auto node_json = [](const NodeConfig& n) {
    json o{{"id", n.id}, {"role", role_name(n.role)}, {"auth_public", n.auth_public.to_hex()}};
    if (!n.endpoint.empty()) o["endpoint"] = n.endpoint;
    return o;
  };
  for (const auto& p : peers) j["peers"].push_back(node_json(p));
  for (const auto& p : parties) j["parties"].push_back(node_json(p));
  return j.dump(2) + "\n";
}

ClusterConfig ClusterConfig::from_json(const std::string& text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Config, std::string("config is not valid JSON: ") + e.what());
  }
  ClusterConfig c;
  try {
    auto read_node = [](const json& o) {
      NodeConfig n;
      n.id = o.at("id").get<std::string>();
      const auto role = role_from_name(o.value("role", std::string("peer")));
      if (!role) throw Error(ErrorCode::Config, "unknown role for '" + n.id + "'");
      n.role = *role;
      n.endpoint = o.value("endpoint", std::string());
      n.auth_public = point_field(o.at("auth_public"), n.id + ".auth_public");
      return n;
    };
    const auto& peers = j.at("peers");
    if (!peers.is_array() || peers.size() != kPeerCount) throw Error(ErrorCode::Config, "config needs exactly five peers");
    for (std::size_t i = 0; i < kPeerCount; ++i) c.peers[i] = read_node(peers[i]);
    for (const auto& o : j.value("parties", json::array())) c.parties.push_back(read_node(o));
    c.ca_public = point_field(j.at("ca_public"), "ca_public");
    c.sampling = j.value("sampling", 0.01);
    if (j.contains("active") && !j["active"].is_null()) c.active = parse_active(j["active"].get<std::string>());
    c.state_dir = j.value("state_dir", std::string("state"));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Config, std::string("config: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Config) throw;
    throw Error(ErrorCode::Config, e.what());
  }
  if (!c.state_dir.empty() && fs::path(c.state_dir).is_relative())
    c.state_dir = (fs::absolute(base_dir) / c.state_dir).lexically_normal().string();
  c.validate();
  return c;
}

ClusterConfig ClusterConfig::load(const std::string& path) {
  return from_json(read_file(path), fs::absolute(path).parent_path().string());
}

void ClusterConfig::save(const std::string& path) const { write_file(path, to_json()); }

const SigningKey& Keyring::at(const std::string& id) const {
  auto it = auth.find(id);
  if (it == auth.end()) throw Error(ErrorCode::Config, "no key for node '" + id + "'");
  return it->second;
}

std::string Keyring::to_json() const {
  json j;
  for (const auto& [id, k] : auth) j["auth"][id] = k.secret_hex();
  j["ca"] = ca.secret_hex();
  for (auto p : kAllPeers) j["file_keys"][letter(p)] = bytes_to_hex(file_keys[peer_index(p)]);
  return j.dump(2) + "\n";
}

Keyring Keyring::from_json(const std::string& text) {
  Keyring k;
  try {
    const auto j = json::parse(text);
    for (const auto& [id, v] : j.at("auth").items()) k.auth.emplace(id, key_field(v, "key of " + id));
    k.ca = key_field(j.at("ca"), "ca key");
    for (auto p : kAllPeers) {
      auto fk = hex_to_array<32>(j.at("file_keys").at(letter(p)).get<std::string>());
      if (!fk) throw Error(ErrorCode::Config, "file key of " + letter(p) + " must be 32 hex bytes");
      k.file_keys[peer_index(p)] = *fk;
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Config, std::string("keyring: ") + e.what());
  }
  return k;
}

Keyring Keyring::load(const std::string& state_dir) { return from_json(read_file(state_dir + "/keys.json")); }

void Keyring::save(const std::string& state_dir) const {
  const auto path = state_dir + "/keys.json";
  write_file(path, to_json());
  fs::permissions(path, fs::perms::owner_read | fs::perms::owner_write);
}

std::string master_path(const std::string& state_dir, PeerId p) { return state_dir + "/peer-" + letter(p) + ".ms"; }
std::string sf_db_path(const std::string& state_dir) { return state_dir + "/sf.db"; }

ClusterConfig setup_cluster(const std::string& config_path, const SetupOptions& opts, RandomSource& rng) {
  const auto secrets = run_setup(rng, opts.faults);
  auto [cfg, keys] = fresh_deployment(rng, opts.host, opts.base_port, true);
  cfg.sampling = opts.sampling;
  cfg.active = opts.active;
  cfg.state_dir = opts.state_dir.empty()
                      ? (fs::absolute(config_path).parent_path() / "state").string()
                      : fs::absolute(opts.state_dir).string();
  cfg.validate();
  fs::create_directories(cfg.state_dir);
  for (auto p : kAllPeers) secrets[peer_index(p)].save(master_path(cfg.state_dir, p), keys.file_keys[peer_index(p)]);
  keys.save(cfg.state_dir);
  // Pseudonyms stored under an earlier setup are meaningless now.
  fs::remove(sf_db_path(cfg.state_dir));
  cfg.save(config_path);
  return cfg;
}

// ---------------------------------------------------------------------------
// Connectors

void MemoryConnector::attach(const std::string& id, Service& service) {
  std::lock_guard lock(mu_);
  slots_[id] = {&service, std::make_shared<std::atomic<bool>>(true)};
}

void MemoryConnector::set_down(const std::string& id, bool down) {
  std::lock_guard lock(mu_);
  auto it = slots_.find(id);
  if (it == slots_.end()) throw Error(ErrorCode::UnknownParty, "no service '" + id + "'");
  it->second.up->store(!down);
}

std::unique_ptr<Connection> MemoryConnector::connect(std::string_view node) {
  std::lock_guard lock(mu_);
  auto it = slots_.find(node);
  if (it == slots_.end()) throw Error(ErrorCode::PeerUnreachable, "no route to " + std::string(node));
  if (!it->second.up->load()) throw Error(ErrorCode::PeerUnreachable, std::string(node) + " is down");
  return std::make_unique<InMemoryConnection>(*it->second.service, it->second.up);
}

void TcpConnector::set_endpoint(const std::string& id, std::string endpoint) { endpoints_[id] = std::move(endpoint); }

std::unique_ptr<Connection> TcpConnector::connect(std::string_view node) {
  auto it = endpoints_.find(node);
  if (it == endpoints_.end() || it->second.empty())
    throw Error(ErrorCode::PeerUnreachable, "no endpoint for " + std::string(node));
  const auto [host, port] = split_endpoint(it->second);
  return TcpConnection::open(host, port);
}

std::unique_ptr<TcpConnector> tcp_connector(const ClusterConfig& config) {
  auto c = std::make_unique<TcpConnector>();
  for (const auto& p : config.peers) c->set_endpoint(p.id, p.endpoint);
  for (const auto& p : config.parties)
    if (!p.endpoint.empty()) c->set_endpoint(p.id, p.endpoint);
  return c;
}

std::unique_ptr<PartyClient> connect_party(const ClusterConfig& config, const Keyring& keys,
                                           const Directory& directory, Connector& connector, const std::string& id,
                                           RandomSource& rng) {
  auto client = std::make_unique<PartyClient>(id, keys.at(id), directory, connector, rng);
  client->set_active(config.active);
  client->set_sampling(config.sampling);
  client->enrol();
  return client;
}

// ---------------------------------------------------------------------------
// LocalCluster

LocalCluster::LocalCluster(ClusterConfig config, Keyring keys, std::array<MasterSecrets, kPeerCount> secrets,
                           ClusterOptions opts)
    : config_(std::move(config)), keys_(std::move(keys)), directory_(config_.directory()) {
  config_.validate();
  for (auto p : kAllPeers) {
    const auto i = peer_index(p);
    if (secrets[i].self() != p) throw Error(ErrorCode::Config, "master secrets of " + letter(p) + " are for another peer");
    peers_[i] = std::make_unique<PeerNode>(secrets[i], keys_.at(letter(p)), directory_, config_.ca_public, opts.faults[i]);
    memory_.attach(letter(p), *peers_[i]);
  }
  table_ = opts.sf_db ? std::make_unique<FlowTable>(*opts.sf_db) : std::make_unique<FlowTable>();
  ca_ = std::make_unique<CertificationAuthority>(keys_.ca);
  connector_ = &memory_;
  if (opts.tcp) {
    tcp_ = std::make_unique<TcpConnector>();
    for (auto p : kAllPeers) {
      servers_.push_back(std::make_unique<TcpServer>(*peers_[peer_index(p)], "127.0.0.1", 0));
      const auto ep = "127.0.0.1:" + std::to_string(servers_.back()->port());
      tcp_->set_endpoint(letter(p), ep);
      config_.peers[peer_index(p)].endpoint = ep;
    }
    connector_ = tcp_.get();
  }
  const auto sf_id = config_.party_with_role(Role::Storage);
  PartyClient sf(sf_id, keys_.at(sf_id), directory_, *connector_);
  sf.enrol();
  storage_ = std::make_unique<StorageNode>(sf_id, keys_.at(sf_id), directory_, sf.encryption_key(), *table_);
  memory_.attach(sf_id, *storage_);
  if (opts.tcp) {
    servers_.push_back(std::make_unique<TcpServer>(*storage_, "127.0.0.1", 0));
    const auto ep = "127.0.0.1:" + std::to_string(servers_.back()->port());
    tcp_->set_endpoint(sf_id, ep);
    for (auto& p : config_.parties)
      if (p.id == sf_id) p.endpoint = ep;
  }
}

LocalCluster::~LocalCluster() {
  for (auto& s : servers_) s->stop();
}

std::unique_ptr<LocalCluster> LocalCluster::ephemeral(std::uint64_t seed, ClusterOptions opts) {
  DeterministicRandom rng(seed);
  auto secrets = run_setup(rng);
  auto [cfg, keys] = fresh_deployment(rng, "", 0, false);
  return std::make_unique<LocalCluster>(std::move(cfg), std::move(keys), std::move(secrets), std::move(opts));
}

std::unique_ptr<LocalCluster> LocalCluster::from_state(const ClusterConfig& config, ClusterOptions opts) {
  auto keys = Keyring::load(config.state_dir);
  std::array<MasterSecrets, kPeerCount> secrets;
  for (auto p : kAllPeers)
    secrets[peer_index(p)] = MasterSecrets::load(master_path(config.state_dir, p), keys.file_keys[peer_index(p)]);
  if (!opts.sf_db) opts.sf_db = sf_db_path(config.state_dir);
  return std::make_unique<LocalCluster>(config, std::move(keys), std::move(secrets), std::move(opts));
}

void LocalCluster::set_down(PeerId p, bool down) {
  if (tcp_) throw Error(ErrorCode::InvalidArgument, "set_down applies to the in-memory transport");
  memory_.set_down(letter(p), down);
}

std::unique_ptr<PartyClient> LocalCluster::party(const std::string& id, RandomSource& rng) {
  return connect_party(config_, keys_, directory_, *connector_, id, rng);
}

StorageClient LocalCluster::storage_client(PartyClient& client) { return StorageClient(client.open_channel(storage_->id())); }

// ---------------------------------------------------------------------------
// Pipelines

PseudonymiseReport pseudonymise_flows(PartyClient& mp, StorageClient& sf, CertificationAuthority& ca,
                                      const std::string& sf_id, const std::vector<PlainFlow>& flows,
                                      std::vector<EncryptedFlow>* encrypted, std::size_t batch) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto permit = ca.issue(mp.id(), Mode::Pseudonymise, {mp.id()}, {sf_id});
  MeteringProcess process(mp, permit, sf_id);
  PseudonymiseReport report;
  report.flows = flows.size();
  for (std::size_t start = 0; start < flows.size(); start += batch) {
    const std::vector<PlainFlow> slice(flows.begin() + static_cast<std::ptrdiff_t>(start),
                                       flows.begin() + static_cast<std::ptrdiff_t>(std::min(flows.size(), start + batch)));
    const auto enc = process.pseudonymise(slice);
    report.stored += sf.ingest(enc);
    if (encrypted) encrypted->insert(encrypted->end(), enc.begin(), enc.end());
  }
  report.metering = process.stats();
  report.sampling = mp.stats();
  report.seconds = seconds_since(t0);
  return report;
}

Retrieval retrieve_as(PartyClient& client, StorageClient& sf, CertificationAuthority& ca, const std::string& sf_id,
                      const std::string& query, const std::vector<GroupElement>& own_pseudonyms) {
  const auto to_sf = ca.issue(client.id(), Mode::Translate, {client.id()}, {sf_id});
  const auto from_sf = ca.issue(client.id(), Mode::Translate, {sf_id}, {client.id()});
  return retrieve(client, sf, sf_id, query, own_pseudonyms, to_sf, from_sf);
}

// ---------------------------------------------------------------------------
// Adversary

std::string_view misbehaviour_name(Misbehaviour m) {
  switch (m) {
    case Misbehaviour::CorruptResult: return "corrupt-result";
    case Misbehaviour::WrongEnrolmentShare: return "wrong-enrolment-share";
    case Misbehaviour::BadSetupPublic: return "bad-setup-public";
    case Misbehaviour::RefuseProof: return "refuse-proof";
  }
  return "?";
}

std::optional<Misbehaviour> misbehaviour_from_name(std::string_view name) {
  for (auto m : {Misbehaviour::CorruptResult, Misbehaviour::WrongEnrolmentShare, Misbehaviour::BadSetupPublic,
                 Misbehaviour::RefuseProof})
    if (misbehaviour_name(m) == name) return m;
  return std::nullopt;
}

void AdversaryScript::validate() const {
  if (peers.empty() || peers.size() > 2) throw Error(ErrorCode::InvalidArgument, "a scenario has one or two adversarial peers");
  if (std::set<PeerId>(peers.begin(), peers.end()).size() != peers.size())
    throw Error(ErrorCode::InvalidArgument, "adversarial peers must be distinct");
  if (!(sampling >= 0.0 && sampling <= 1.0)) throw Error(ErrorCode::InvalidArgument, "sampling must be in [0,1]");
  if (ops == 0 || ops > 4096) throw Error(ErrorCode::InvalidArgument, "ops per trial must be in 1..4096");
  if (trials == 0) throw Error(ErrorCode::InvalidArgument, "trials must be positive");
}

std::string AdversaryReport::to_json() const {
  json j;
  j["scenario"] = misbehaviour_name(script.kind);
  for (auto p : script.peers) j["adversaries"].push_back(letter(p));
  j["sampling"] = script.sampling;
  j["ops_per_trial"] = script.ops;
  j["trials"] = script.trials;
  j["detected"] = detected;
  j["identified"] = json::array();
  for (auto p : identified) j["identified"].push_back(letter(p));
  j["detector"] = detector;
  j["first_detection_op"] = first_op ? json(*first_op) : json(nullptr);
  j["detected_trials"] = detected_trials;
  j["expected_rate"] = expected_rate;
  j["empirical_rate"] = empirical_rate;
  j["sigma"] = sigma;
  j["within_3sigma"] = within_3sigma;
  if (!note.empty()) j["note"] = note;
  return j.dump();
}

std::string AdversaryReport::to_text() const {
  std::ostringstream o;
  o << misbehaviour_name(script.kind) << " by";
  for (auto p : script.peers) o << ' ' << peer_letter(p);
  o << ": " << (detected ? "detected" : "NOT detected");
  if (detected) {
    o << " by " << detector;
    if (!identified.empty()) {
      o << ", identified";
      for (auto p : identified) o << ' ' << peer_letter(p);
    }
    if (first_op) o << ", first after " << *first_op << " operation(s)";
  }
  o << '\n';
  if (script.kind == Misbehaviour::CorruptResult || script.kind == Misbehaviour::RefuseProof) {
    o << "  q=" << script.sampling << " n=" << script.ops << " trials=" << script.trials << ": detected in "
      << detected_trials << " trials, rate " << empirical_rate << " vs expected " << expected_rate << " (sigma "
      << sigma << ", " << (within_3sigma ? "within" : "OUTSIDE") << " 3 sigma)\n";
  }
  if (!note.empty()) o << "  " << note << '\n';
  return o.str();
}

AdversaryReport run_adversary(const AdversaryScript& script) {
  script.validate();
  AdversaryReport rep;
  rep.script = script;
  const std::set<PeerId> bad(script.peers.begin(), script.peers.end());

  if (script.kind == Misbehaviour::BadSetupPublic) {
    DeterministicRandom rng(script.seed);
    std::array<SetupFault, kPeerCount> faults{};
    for (auto p : script.peers) faults[peer_index(p)].corrupt_public = true;
    try {
      run_setup(rng, faults);
      rep.note = "setup completed";
    } catch (const Error& e) {
      if (e.code() != ErrorCode::MismatchAbort) throw;
      rep.detected = true;
      rep.detector = "setup";
      rep.first_op = 1;
      rep.note = e.what();
    }
    rep.detected_trials = rep.detected ? 1 : 0;
    rep.expected_rate = 1.0;
    rep.empirical_rate = rep.detected ? 1.0 : 0.0;
    rep.within_3sigma = rep.detected;
    return rep;
  }

  ClusterOptions opts;
  if (script.kind == Misbehaviour::WrongEnrolmentShare) {
    std::optional<TripleId> common;
    for (auto t : all_triples()) {
      if (std::all_of(script.peers.begin(), script.peers.end(), [&](PeerId p) { return triple_contains(t, p); })) {
        common = t;
        break;
      }
    }
    for (auto p : script.peers) opts.faults[peer_index(p)].enrolment_lie = common;
    auto cluster = LocalCluster::ephemeral(script.seed, opts);
    const std::string id = cluster->config().party_with_role(Role::Researcher);
    PartyClient client(id, cluster->keys().at(id), cluster->directory(), cluster->connector());
    const auto report = client.enrol();
    rep.identified = report.liars;
    rep.detector = id;
    rep.detected = std::set<PeerId>(report.liars.begin(), report.liars.end()) == bad;
    rep.first_op = 1;
    rep.detected_trials = rep.detected ? 1 : 0;
    rep.expected_rate = 1.0;
    rep.empirical_rate = rep.detected_trials;
    rep.within_3sigma = rep.detected;
    rep.note = "lies on triple " + triple_name(*common);
    return rep;
  }

  for (auto p : script.peers) {
    auto& f = opts.faults[peer_index(p)];
    if (script.kind == Misbehaviour::CorruptResult) {
      f.corrupt_probability = 1.0;
      f.corrupt_after = script.honest_first;
    } else {
      f.refuse_proof = true;
    }
  }
  auto cluster = LocalCluster::ephemeral(script.seed, opts);
  const std::string id = cluster->config().party_with_role(Role::Metering);
  const std::string sf = cluster->config().party_with_role(Role::Storage);
  auto client = cluster->party(id);
  const auto active = active_including(script.peers);
  client->set_active(active);
  client->set_sampling(script.sampling);
  client->set_throw_on_detection(false);
  DeterministicRandom sample_rng(script.seed ^ 0x5a5a5a5aULL);
  DeterministicRandom data_rng(script.seed + 1);
  client->set_sampling_rng(sample_rng);
  const auto permit = cluster->ca().issue(id, Mode::Pseudonymise, {id}, {sf});
  const auto target = client->encryption_public();

  std::uint64_t served = 0;  // adversary operations so far, per adversarial peer
  double expected_sum = 0;
  std::set<PeerId> identified;
  for (std::uint64_t trial = 0; trial < script.trials; ++trial) {
    std::vector<Cyphertext> cs;
    cs.reserve(script.ops);
    for (std::uint64_t i = 0; i < script.ops; ++i)
      cs.push_back(encrypt(GroupElement::base_mul(Scalar::random_nonzero(data_rng)), target, data_rng));
    client->reset_stats();
    client->transcrypt(Mode::Pseudonymise, id, sf, cs, permit);

    const std::uint64_t misbehaving =
        script.kind == Misbehaviour::CorruptResult
            ? script.ops - std::min(script.ops, script.honest_first > served ? script.honest_first - served : 0)
            : script.ops;
    expected_sum += 1.0 - std::pow(1.0 - script.sampling, static_cast<double>(misbehaving));

    bool hit = false;
    for (const auto& d : client->stats().detections) {
      identified.insert(d.peer);
      if (!bad.count(d.peer)) continue;
      if (!hit && !rep.first_op) {
        const auto pos = static_cast<std::uint64_t>(std::find(active.begin(), active.end(), d.peer) - active.begin());
        rep.first_op = served + (d.operation - pos * script.ops) + 1;
      }
      hit = true;
    }
    if (hit) ++rep.detected_trials;
    served += script.ops;
  }
  rep.identified.assign(identified.begin(), identified.end());
  rep.detected = rep.detected_trials > 0;
  rep.detector = id;
  const double trials = static_cast<double>(script.trials);
  rep.expected_rate = expected_sum / trials;
  rep.empirical_rate = static_cast<double>(rep.detected_trials) / trials;
  rep.sigma = std::sqrt(rep.expected_rate * (1.0 - rep.expected_rate) / trials);
  rep.within_3sigma = std::abs(rep.empirical_rate - rep.expected_rate) <= 3.0 * rep.sigma + 1e-12;
  return rep;
}

// ---------------------------------------------------------------------------
// Bench

namespace {

std::string hardware_description() {
  std::string model = "unknown cpu";
  std::ifstream in("/proc/cpuinfo");
  for (std::string line; std::getline(in, line);) {
    if (line.rfind("model name", 0) == 0) {
      model = line.substr(line.find(':') + 2);
      break;
    }
  }
  return model + ", " + std::to_string(std::thread::hardware_concurrency()) + " hardware threads";
}

template <typename F>
BenchEntry measure(std::string name, std::uint64_t iterations, std::optional<double> reference, F&& f) {
  f();  // warm caches
  reset_op_counters();
  const auto t0 = std::chrono::steady_clock::now();
  for (std::uint64_t i = 0; i < iterations; ++i) f();
  const auto secs = seconds_since(t0);
  const auto c = op_counters();
  BenchEntry e{std::move(name), iterations, secs * 1e6 / static_cast<double>(iterations),
               {c.general / iterations, c.base / iterations, c.dual / iterations}, reference};
  return e;
}

}  // namespace

std::vector<std::string> BenchReport::to_json_lines() const {
  std::vector<std::string> out;
  out.push_back(json{{"kind", "hardware"}, {"description", hardware}}.dump());
  for (const auto& e : entries) {
    json j{{"kind", "micro"},
           {"name", e.name},
           {"iterations", e.iterations},
           {"micros", e.micros},
           {"general_muls", e.ops.general},
           {"base_muls", e.ops.base},
           {"dual_muls", e.ops.dual}};
    j["reference_micros"] = e.reference_micros ? json(*e.reference_micros) : json(nullptr);
    out.push_back(j.dump());
  }
  out.push_back(json{{"kind", "pipeline"},
                     {"unique_addresses", unique_addresses},
                     {"seconds", pipeline_seconds},
                     {"unique_per_minute", unique_per_minute},
                     {"floor_per_minute", 20000}}
                    .dump());
  return out;
}

std::string BenchReport::to_text() const {
  std::ostringstream o;
  o << "hardware: " << hardware << '\n';
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-28s %10s %8s %5s %5s %10s\n", "operation", "us/op", "general", "base", "dual", "reference");
  o << buf;
  for (const auto& e : entries) {
    std::snprintf(buf, sizeof buf, "%-28s %10.1f %8llu %5llu %5llu %10s\n", e.name.c_str(), e.micros,
                  static_cast<unsigned long long>(e.ops.general), static_cast<unsigned long long>(e.ops.base),
                  static_cast<unsigned long long>(e.ops.dual),
                  e.reference_micros ? std::to_string(static_cast<int>(*e.reference_micros)).c_str() : "-");
    o << buf;
  }
  std::snprintf(buf, sizeof buf, "pipeline: %zu unique addresses in %.2f s = %.0f unique/min (floor 20000)\n",
                unique_addresses, pipeline_seconds, unique_per_minute);
  o << buf;
  return o.str();
}

BenchReport run_bench(std::size_t unique_addresses, std::uint64_t micro_iterations, std::uint64_t seed) {
  BenchReport rep;
  rep.hardware = hardware_description();
  DeterministicRandom rng(seed);
  const auto s = Scalar::random_nonzero(rng), n = Scalar::random_nonzero(rng), r = Scalar::random_nonzero(rng);
  const auto p = GroupElement::base_mul(Scalar::random_nonzero(rng));
  const auto target = GroupElement::base_mul(s);
  const auto c = encrypt(p, target, rng);
  const auto new_target = s * target;
  Address128 addr{};
  rng.fill(addr);
  const auto encoded = lizard_encode(addr);
  const auto it = micro_iterations;

  rep.entries.push_back(measure("scalar_mul", it, 125.0, [&] { (void)(s * p); }));
  rep.entries.push_back(measure("base_mul", it, 45.0, [&] { (void)GroupElement::base_mul(s); }));
  rep.entries.push_back(measure("encrypt", it, std::nullopt, [&] { (void)encrypt(p, target, r); }));
  rep.entries.push_back(measure("decrypt", it, std::nullopt, [&] { (void)decrypt(c, s); }));
  rep.entries.push_back(measure("rsk", it, std::nullopt, [&] { (void)rsk(c, s, n, r); }));
  rep.entries.push_back(measure("rsk_fixed_target", it, std::nullopt, [&] { (void)rsk(c, s, n, r, new_target); }));
  rep.entries.push_back(measure("lizard_encode", it, std::nullopt, [&] { (void)lizard_encode(addr); }));
  rep.entries.push_back(measure("lizard_decode", it, std::nullopt, [&] { (void)lizard_decode(encoded); }));
  // Encryption at the metering process plus one fixed-target rsk per active peer.
  rep.entries.push_back(measure("per_address_main_ops", it, 2300.0, [&] {
    auto x = encrypt(encoded, target, r);
    for (int k = 0; k < 3; ++k) x = rsk(x, s, n, r, new_target);
    (void)x;
  }));

  auto cluster = LocalCluster::ephemeral(seed);
  const auto mp_id = cluster->config().party_with_role(Role::Metering);
  const auto sf_id = cluster->config().party_with_role(Role::Storage);
  auto mp = cluster->party(mp_id);
  auto sf = cluster->storage_client(*mp);
  std::set<Address128> pool;
  while (pool.size() < unique_addresses) {
    Address128 a{};
    rng.fill(a);
    pool.insert(a);
  }
  std::vector<Address128> addrs(pool.begin(), pool.end());
  std::vector<PlainFlow> flows;
  for (std::size_t i = 0; i < addrs.size(); i += 2) {
    PlainFlow f;
    f.ts_start = static_cast<std::int64_t>(i) * 1000;
    f.ts_end = f.ts_start + 500;
    f.src = addrs[i];
    f.dst = addrs[(i + 1) % addrs.size()];
    f.src_port = 443;
    f.dst_port = static_cast<std::uint16_t>(1024 + i % 60000);
    f.proto = 6;
    f.packets = 10;
    f.bytes = 1500;
    flows.push_back(f);
  }
  const auto report = pseudonymise_flows(*mp, sf, cluster->ca(), sf_id, flows);
  rep.unique_addresses = addrs.size();
  rep.pipeline_seconds = report.seconds;
  rep.unique_per_minute = static_cast<double>(addrs.size()) / report.seconds * 60.0;
  return rep;
}

}  // namespace pep3
