#include <CLI11.hpp>
#include <json.hpp>

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "pep3/harness.hpp"
#include "pep3/lizard.hpp"

using namespace pep3;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitVerification = 2;
constexpr int kExitSetupAbort = 3;

int exit_code_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::ProofVerificationFailure:
    case ErrorCode::ChainBreak:
    case ErrorCode::ChainInvalid:
    case ErrorCode::TicketForged:
    case ErrorCode::TicketMismatch:
    case ErrorCode::NotAnAddress:
      return kExitVerification;
    case ErrorCode::MismatchAbort:
      return kExitSetupAbort;
    default:
      return kExitError;
  }
}

struct Globals {
  std::string config = "pep3.json";
  std::string active;
  std::optional<double> sampling;
  bool in_process = false;
  std::string report;
};

ClusterConfig load_config(const Globals& g) {
  auto cfg = ClusterConfig::load(g.config);
  if (!g.active.empty()) cfg.active = parse_active(g.active);
  if (g.sampling) cfg.sampling = *g.sampling;
  cfg.validate();
  return cfg;
}

void append_report(const Globals& g, const std::vector<std::string>& lines) {
  if (g.report.empty()) return;
  std::ofstream out(g.report, std::ios::app);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + g.report);
  for (const auto& l : lines) out << l << '\n';
}

// Either an in-process cluster over the state dir or TCP to running nodes.
class Deployment {
 public:
  explicit Deployment(const Globals& g) : config_(load_config(g)) {
    keys_ = Keyring::load(config_.state_dir);
    if (g.in_process) {
      local_ = LocalCluster::from_state(config_);
      local_->config().active = config_.active;
      local_->config().sampling = config_.sampling;
    } else {
      directory_ = config_.directory();
      tcp_ = tcp_connector(config_);
    }
    ca_ = std::make_unique<CertificationAuthority>(keys_.ca);
  }

  const ClusterConfig& config() const { return config_; }
  CertificationAuthority& ca() { return *ca_; }
  std::string sf_id() const { return config_.party_with_role(Role::Storage); }

  std::unique_ptr<PartyClient> party(const std::string& id) {
    if (local_) return local_->party(id);
    return connect_party(config_, keys_, directory_, *tcp_, id);
  }
  StorageClient storage(PartyClient& client) { return StorageClient(client.open_channel(sf_id())); }

 private:
  ClusterConfig config_;
  Keyring keys_;
  Directory directory_;
  std::unique_ptr<TcpConnector> tcp_;
  std::unique_ptr<LocalCluster> local_;
  std::unique_ptr<CertificationAuthority> ca_;
};

std::string sampling_line(const SamplingStats& s) {
  return "proof sampling: " + std::to_string(s.sampled) + " of " + std::to_string(s.operations) +
         " operations checked, " + std::to_string(s.verified) + " verified, " + std::to_string(s.detections.size()) +
         " failed";
}

void print_detections(const SamplingStats& s) {
  for (const auto& d : s.detections)
    std::cerr << "  peer " << peer_letter(d.peer) << " at operation " << d.operation << ": " << d.reason << '\n';
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string trimmed(std::string s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.erase(s.begin());
  return s;
}

Cyphertext parse_cyphertext(const std::string& hex) {
  auto c = Cyphertext::from_hex(trimmed(hex));
  if (!c) throw Error(ErrorCode::InvalidArgument, "not a 96-byte cyphertext in hex");
  return *c;
}

// ---------------------------------------------------------------------------

int cmd_setup(const Globals& g, const std::string& state_dir, const std::string& host, std::uint16_t base_port,
              const std::vector<std::string>& inject) {
  SetupOptions o;
  o.state_dir = state_dir;
  o.host = host;
  o.base_port = base_port;
  if (g.sampling) o.sampling = *g.sampling;
  if (!g.active.empty()) o.active = parse_active(g.active);
  for (const auto& spec : inject) {
    const auto colon = spec.find(':');
    const auto kind = spec.substr(0, colon);
    const auto who = colon == std::string::npos ? std::string() : spec.substr(colon + 1);
    if (who.size() != 1 || !peer_from_letter(who[0]))
      throw Error(ErrorCode::InvalidArgument, "inject takes kind:PEER, e.g. bad-setup-public:B");
    auto& f = o.faults[peer_index(*peer_from_letter(who[0]))];
    if (kind == "bad-setup-public") f.corrupt_public = true;
    else if (kind == "bad-missive") f.corrupt_missive = true;
    else throw Error(ErrorCode::InvalidArgument, "unknown setup fault '" + kind + "'");
  }
  const auto cfg = setup_cluster(g.config, o);
  std::cout << "setup complete: powers tables consistent across all five peers\n"
            << "config: " << std::filesystem::absolute(g.config).string() << "\nstate: " << cfg.state_dir << '\n';
  return kExitOk;
}

volatile std::sig_atomic_t g_stop = 0;

int cmd_run(const Globals& g, std::vector<std::string> nodes) {
  const auto cfg = load_config(g);
  const auto keys = Keyring::load(cfg.state_dir);
  const auto directory = cfg.directory();
  if (nodes.empty()) {
    for (const auto& p : cfg.peers) nodes.push_back(p.id);
    nodes.push_back(cfg.party_with_role(Role::Storage));
  }
  std::vector<std::unique_ptr<Service>> services;
  std::vector<std::unique_ptr<TcpServer>> servers;
  std::vector<std::unique_ptr<FlowTable>> tables;
  auto connector = tcp_connector(cfg);
  for (const auto& id : nodes) {
    const auto& node = cfg.node(id);
    if (node.endpoint.empty()) throw Error(ErrorCode::Config, "node '" + id + "' has no endpoint");
    const auto [host, port] = split_endpoint(node.endpoint);
    if (node.role == Role::Peer) {
      const auto p = *peer_from_letter(id[0]);
      auto secrets = MasterSecrets::load(master_path(cfg.state_dir, p), keys.file_keys[peer_index(p)]);
      services.push_back(std::make_unique<PeerNode>(std::move(secrets), keys.at(id), directory, cfg.ca_public));
    } else if (node.role == Role::Storage) {
      PartyClient self(id, keys.at(id), directory, *connector);
      const auto report = self.enrol();
      if (!report.liars.empty()) {
        std::cerr << id << ": enrolment flagged peers";
        for (auto p : report.liars) std::cerr << ' ' << peer_letter(p);
        std::cerr << '\n';
      }
      tables.push_back(std::make_unique<FlowTable>(sf_db_path(cfg.state_dir)));
      services.push_back(std::make_unique<StorageNode>(id, keys.at(id), directory, self.encryption_key(), *tables.back()));
    } else {
      throw Error(ErrorCode::Config, "node '" + id + "' does not serve anything");
    }
    servers.push_back(std::make_unique<TcpServer>(*services.back(), host, port));
    std::cout << id << " listening on " << host << ':' << servers.back()->port() << std::endl;
  }
  std::signal(SIGINT, [](int) { g_stop = 1; });
  std::signal(SIGTERM, [](int) { g_stop = 1; });
  while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  for (auto& s : servers) s->stop();
  return kExitOk;
}

int cmd_pseudonymise(const Globals& g, const std::string& input, const std::string& output, std::string as) {
  Deployment d(g);
  if (as.empty()) as = d.config().party_with_role(Role::Metering);
  std::ifstream in(input);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + input);
  const auto flows = read_flows_csv(in);
  auto mp = d.party(as);
  auto sf = d.storage(*mp);
  std::vector<EncryptedFlow> encrypted;
  PseudonymiseReport rep;
  try {
    rep = pseudonymise_flows(*mp, sf, d.ca(), d.sf_id(), flows, output.empty() ? nullptr : &encrypted);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::ProofVerificationFailure) throw;
    std::cerr << "verification failure: " << e.what() << '\n' << sampling_line(mp->stats()) << '\n';
    print_detections(mp->stats());
    return kExitVerification;
  }
  if (!output.empty()) {
    std::ofstream out(output, std::ios::trunc);
    out << "ts_start,ts_end,src,dst,src_port,dst_port,proto,packets,bytes\n";
    for (const auto& f : encrypted)
      out << f.ts_start << ',' << f.ts_end << ',' << f.src.to_hex() << ',' << f.dst.to_hex() << ',' << f.src_port << ','
          << f.dst_port << ',' << unsigned(f.proto) << ',' << f.packets << ',' << f.bytes << '\n';
    if (!out) throw Error(ErrorCode::Io, "cannot write " + output);
  }
  std::cout << "flows read: " << rep.flows << "\nflows stored: " << rep.stored << "\nunique addresses sent: "
            << rep.metering.cache_misses << " (cache hits " << rep.metering.cache_hits << ")\n"
            << sampling_line(rep.sampling) << "\nelapsed: " << rep.seconds << " s\n";
  append_report(g, {nlohmann::json{{"kind", "pseudonymise"},
                                   {"flows", rep.flows},
                                   {"stored", rep.stored},
                                   {"unique_sent", rep.metering.cache_misses},
                                   {"sampled", rep.sampling.sampled},
                                   {"detections", rep.sampling.detections.size()},
                                   {"seconds", rep.seconds}}
                        .dump()});
  return kExitOk;
}

int cmd_retrieve(const Globals& g, const std::string& query, const std::vector<std::string>& args, std::string as,
                 bool show_encrypted) {
  Deployment d(g);
  if (as.empty()) as = d.config().party_with_role(Role::Researcher);
  std::vector<GroupElement> points;
  for (const auto& a : args) {
    auto p = GroupElement::from_hex(a);
    if (!p) throw Error(ErrorCode::InvalidArgument, "argument is not a pseudonym point: " + a);
    points.push_back(*p);
  }
  auto client = d.party(as);
  auto sf = d.storage(*client);
  const auto res = retrieve_as(*client, sf, d.ca(), d.sf_id(), query, points);
  if (res.plain.count) {
    std::cout << "count\n" << *res.plain.count << '\n';
  } else {
    for (std::size_t i = 0; i < res.plain.columns.size(); ++i) {
      std::cout << (i ? "," : "") << column_name(res.plain.columns[i]);
      if (show_encrypted && is_pseudonym_column(res.plain.columns[i]))
        std::cout << ',' << column_name(res.plain.columns[i]) << "_enc";
    }
    std::cout << '\n';
    for (std::size_t r = 0; r < res.plain.rows.size(); ++r) {
      for (std::size_t i = 0; i < res.plain.rows[r].size(); ++i) {
        if (i) std::cout << ',';
        const auto& v = res.plain.rows[r][i];
        if (const auto* p = std::get_if<GroupElement>(&v)) {
          std::cout << p->to_hex();
          if (show_encrypted) std::cout << ',' << std::get<Cyphertext>(res.encrypted.rows[r][i]).to_hex();
        } else {
          std::cout << std::get<std::uint64_t>(v);
        }
      }
      std::cout << '\n';
    }
  }
  std::cerr << sampling_line(client->stats()) << '\n';
  return kExitOk;
}

int cmd_warrant(const Globals& g, const std::string& cyphertext, std::string subject, const std::string& output,
                std::int64_t lifetime) {
  const auto cfg = load_config(g);
  const auto keys = Keyring::load(cfg.state_dir);
  if (subject.empty()) subject = cfg.party_with_role(Role::Investigator);
  CertificationAuthority ca(keys.ca);
  const auto warrant =
      ca.issue(subject, Mode::Depseudonymise, {subject}, {subject}, parse_cyphertext(cyphertext), lifetime);
  const auto hex = bytes_to_hex(warrant.encode());
  if (output.empty()) {
    std::cout << hex << '\n';
  } else {
    std::ofstream out(output, std::ios::trunc);
    if (!(out << hex << '\n')) throw Error(ErrorCode::Io, "cannot write " + output);
  }
  return kExitOk;
}

int cmd_depseudonymise(const Globals& g, const std::string& cyphertext, const std::string& warrant_path,
                       std::string as) {
  Deployment d(g);
  if (as.empty()) as = d.config().party_with_role(Role::Investigator);
  const auto bytes = hex_to_bytes(trimmed(read_text(warrant_path)));
  if (!bytes) throw Error(ErrorCode::InvalidArgument, "warrant file is not hex");
  const auto warrant = Permit::decode(*bytes);
  auto client = d.party(as);
  std::cout << investigate_depseudonymise(*client, parse_cyphertext(cyphertext), warrant) << '\n';
  return kExitOk;
}

int cmd_adversary(const Globals& g, AdversaryScript s, const std::string& scenario, const std::string& peers) {
  const auto kind = misbehaviour_from_name(scenario);
  if (!kind) throw Error(ErrorCode::InvalidArgument, "unknown scenario '" + scenario + "'");
  s.kind = *kind;
  for (char ch : peers) {
    const auto p = peer_from_letter(ch);
    if (!p) throw Error(ErrorCode::InvalidArgument, std::string("not a peer letter: ") + ch);
    s.peers.push_back(*p);
  }
  s.sampling = g.sampling.value_or(s.kind == Misbehaviour::CorruptResult || s.kind == Misbehaviour::RefuseProof ? 1.0 : 0.0);
  const auto rep = run_adversary(s);
  std::cout << rep.to_text();
  append_report(g, {rep.to_json()});
  return kExitOk;
}

int cmd_synth(const std::string& output, std::size_t count, std::size_t unique, std::uint64_t seed) {
  DeterministicRandom rng(seed);
  const auto flows = synthetic_flows(count, unique, rng);
  std::ofstream out(output, std::ios::trunc);
  write_flows_csv(out, flows);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + output);
  return kExitOk;
}

int cmd_bench(const Globals& g, std::size_t unique, std::uint64_t iterations) {
  const auto rep = run_bench(unique, iterations);
  std::cout << rep.to_text();
  append_report(g, rep.to_json_lines());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PEP3 transcryptor: five peers pseudonymising flow records"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "cluster config (JSON)");
  app.add_option("--active", g.active, "active peer subset, e.g. ACD");
  app.add_option("--sampling", g.sampling, "proof sampling probability")->check(CLI::Range(0.0, 1.0));
  app.add_flag("--in-process", g.in_process, "run the cluster inside this process from the state dir");
  app.add_option("--report", g.report, "append JSON lines to this file");

  std::string state_dir, host = "127.0.0.1";
  std::uint16_t base_port = 7100;
  std::vector<std::string> inject;
  auto* setup = app.add_subcommand("setup", "run the setup exchange and write config and state");
  setup->add_option("--state-dir", state_dir, "where keys and master secrets go (default: next to the config)");
  setup->add_option("--host", host, "host for the peer endpoints");
  setup->add_option("--base-port", base_port, "peers listen on base+1..base+5, the storage facility on base+10");
  setup->add_option("--inject", inject, "scripted setup fault kind:PEER")->group("");

  std::vector<std::string> nodes;
  auto* run = app.add_subcommand("run", "serve peers and the storage facility over TCP until interrupted");
  run->add_option("--node", nodes, "node id to serve (repeatable; default: all)");

  std::string input, output, as;
  auto* pseud = app.add_subcommand("pseudonymise", "pseudonymise a flow CSV and store it at the storage facility");
  pseud->add_option("--input", input, "flow CSV")->required();
  pseud->add_option("--output", output, "write the encrypted flows here");
  pseud->add_option("--as", as, "metering party id");

  std::string query;
  std::vector<std::string> args;
  bool show_encrypted = false;
  auto* retr = app.add_subcommand("retrieve", "query the storage facility in own pseudonyms");
  retr->add_option("query", query, "query text")->required();
  retr->add_option("--arg", args, "pseudonym argument $1, $2, ... (hex point)");
  retr->add_option("--as", as, "querying party id");
  retr->add_flag("--encrypted", show_encrypted, "also print own-key cyphertexts of pseudonym columns");

  std::string cyphertext, warrant_path, subject;
  std::int64_t lifetime = 24 * 3600;
  auto* warrant = app.add_subcommand("warrant", "issue a depseudonymisation warrant with the CA key");
  warrant->add_option("cyphertext", cyphertext, "encrypted pseudonym (hex)")->required();
  warrant->add_option("--subject", subject, "investigator id");
  warrant->add_option("--output", output, "write the warrant here");
  warrant->add_option("--lifetime", lifetime, "seconds until expiry");

  auto* deps = app.add_subcommand("depseudonymise", "recover the address behind an encrypted pseudonym");
  deps->add_option("cyphertext", cyphertext, "encrypted pseudonym named in the warrant (hex)")->required();
  deps->add_option("--warrant", warrant_path, "warrant file")->required();
  deps->add_option("--as", as, "investigator id");

  AdversaryScript script;
  std::string scenario = "corrupt-result", adversaries = "B";
  auto* adv = app.add_subcommand("adversary", "run a misbehaving-peer experiment");
  adv->add_option("--scenario", scenario, "corrupt-result | wrong-enrolment-share | bad-setup-public | refuse-proof");
  adv->add_option("--peers", adversaries, "one or two adversarial peers, e.g. AB");
  adv->add_option("--ops", script.ops, "adversary operations per trial");
  adv->add_option("--trials", script.trials, "number of trials");
  adv->add_option("--honest-first", script.honest_first, "operations served honestly before misbehaving");
  adv->add_option("--seed", script.seed, "experiment seed");

  std::size_t unique = 20000;
  std::uint64_t iterations = 500;
  auto* bench = app.add_subcommand("bench", "operation timings and end-to-end throughput");
  bench->add_option("--unique", unique, "unique addresses for the throughput run");
  bench->add_option("--iterations", iterations, "iterations per micro benchmark");

  std::size_t synth_count = 1000, synth_unique = 300;
  std::uint64_t synth_seed = 1;
  auto* synth = app.add_subcommand("synth", "write a synthetic flow CSV");
  synth->add_option("--output", output, "CSV path")->required();
  synth->add_option("--count", synth_count, "number of flows");
  synth->add_option("--unique", synth_unique, "size of the address pool");
  synth->add_option("--seed", synth_seed, "generator seed");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*setup) return cmd_setup(g, state_dir, host, base_port, inject);
    if (*run) return cmd_run(g, nodes);
    if (*pseud) return cmd_pseudonymise(g, input, output, as);
    if (*retr) return cmd_retrieve(g, query, args, as, show_encrypted);
    if (*warrant) return cmd_warrant(g, cyphertext, subject, output, lifetime);
    if (*deps) return cmd_depseudonymise(g, cyphertext, warrant_path, as);
    if (*adv) return cmd_adversary(g, script, scenario, adversaries);
    if (*bench) return cmd_bench(g, unique, iterations);
    if (*synth) return cmd_synth(output, synth_count, synth_unique, synth_seed);
  } catch (const Error& e) {
    std::cerr << "pep3: " << e.what() << '\n';
    if (e.code() == ErrorCode::MismatchAbort) std::cerr << "setup aborted; nothing was written\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "pep3: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
