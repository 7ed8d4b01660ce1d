// Acceptance checks 1-8. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include "pep3/harness.hpp"
#include "pep3/lizard.hpp"

using namespace pep3;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects failures without stopping at the first one.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok && failures_.size() < 5) failures_.push_back(what);
    if (!ok) ++failed_;
  }
  Outcome done(std::string summary) const {
    if (failed_ == 0) return {true, std::move(summary)};
    std::string d = std::to_string(failed_) + " failed check(s): ";
    for (std::size_t i = 0; i < failures_.size(); ++i) d += (i ? "; " : "") + failures_[i];
    return {false, d};
  }

 private:
  std::vector<std::string> failures_;
  std::size_t failed_ = 0;
};

GroupElement random_element(RandomSource& rng) { return GroupElement::base_mul(Scalar::random_nonzero(rng)); }

fs::path scratch_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("pep3-acceptance-" + std::to_string(::getpid())) / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

// 1 ------------------------------------------------------------------------
Outcome crypto_roundtrips() {
  constexpr int kCases = 1000;
  DeterministicRandom rng(101);
  Check ck;
  for (int i = 0; i < kCases; ++i) {
    const auto m = random_element(rng);
    const auto s = Scalar::random_nonzero(rng);
    const auto target = GroupElement::base_mul(s);
    const auto c = encrypt(m, target, rng);
    ck.expect(decrypt(c, s) == m, "decrypt(encrypt(m)) != m");

    const auto k = Scalar::random_nonzero(rng), n = Scalar::random_nonzero(rng), r = Scalar::random_nonzero(rng);
    const auto rk = rekey(c, k);
    ck.expect(rk.target == k * target && decrypt(rk, s * k) == m, "rekey algebra");
    ck.expect(decrypt(reshuffle(c, n), s) == n * m, "reshuffle algebra");
    const auto rr = rerandomise(c, r);
    ck.expect(decrypt(rr, s) == m && !(rr.blinding == c.blinding), "rerandomise algebra");
    ck.expect(rsk(c, k, n, r) == rekey(reshuffle(rerandomise(c, r), n), k), "rsk != stepwise composition");

    const auto k2 = Scalar::random_nonzero(rng), n2 = Scalar::random_nonzero(rng), r2 = Scalar::random_nonzero(rng);
    const auto ab = rsk(rsk(c, k, n, r), k2, n2, r2);
    const auto ba = rsk(rsk(c, k2, n2, r2), k, n, r);
    const auto key = s * k * k2;
    ck.expect(decrypt(ab, key) == decrypt(ba, key), "rsk composition depends on order");
    ck.expect(decrypt(ab, key) == (n * n2) * m, "composed rsk != single rsk with product factors");
    ck.expect(ab.target == ba.target, "composed targets differ");
  }
  return ck.done(std::to_string(kCases) + " cases each: decrypt/encrypt, rekey, reshuffle, rerandomise, rsk order");
}

// 2 ------------------------------------------------------------------------
Outcome share_algebra() {
  Check ck;
  int pairs = 0, triples = 0;
  for (int a = 0; a < kPeerCount; ++a) {
    for (int b = a + 1; b < kPeerCount; ++b) {
      ++pairs;
      const TripleMask held = triples_of(static_cast<PeerId>(a)) | triples_of(static_cast<PeerId>(b));
      ck.expect(held != kAllTriplesMask, "a pair of peers holds every share");
      for (int c = b + 1; c < kPeerCount; ++c) {
        ++triples;
        ck.expect((held | triples_of(static_cast<PeerId>(c))) == kAllTriplesMask, "a peer triple misses a share");
      }
    }
  }
  ck.expect(pairs == 10 && triples == 10, "enumeration");

  DeterministicRandom rng(102);
  const auto ms = run_setup(rng);
  const std::string p_id = "mp", q_id = "researcher";
  auto key_of = [&](const std::string& id, KeyKind kind) {
    Scalar k = Scalar::one();
    for (auto t : all_triples()) k *= derive_share(ms[peer_index(triple_members(t)[0])].master(t, kind), id);
    return k;
  };
  const KeyPair p{key_of(p_id, KeyKind::Encryption), key_of(p_id, KeyKind::Pseudonym)};
  const KeyPair q{key_of(q_id, KeyKind::Encryption), key_of(q_id, KeyKind::Pseudonym)};

  std::array<KeyPair, kTripleCount> step_from, step_to;
  for (auto t : all_triples()) {
    const auto& m = ms[peer_index(triple_members(t)[0])];
    step_from[t.index] = {derive_share(m.master(t, KeyKind::Encryption), p_id),
                          derive_share(m.master(t, KeyKind::Pseudonym), p_id)};
    step_to[t.index] = {derive_share(m.master(t, KeyKind::Encryption), q_id),
                        derive_share(m.master(t, KeyKind::Pseudonym), q_id)};
  }
  struct Hop {
    KeyPair from, to;
  };
  std::vector<std::array<Hop, 3>> subsets;
  for (const auto& act : all_active_sets()) {
    const auto parts = partition_triples(act);
    std::array<Hop, 3> hops;
    for (int j = 0; j < 3; ++j) {
      const auto& m = ms[peer_index(act[j])];
      const auto mask = parts[peer_index(act[j])];
      hops[j] = {{partition_factor(m, mask, p_id, KeyKind::Encryption), partition_factor(m, mask, p_id, KeyKind::Pseudonym)},
                 {partition_factor(m, mask, q_id, KeyKind::Encryption), partition_factor(m, mask, q_id, KeyKind::Pseudonym)}};
    }
    subsets.push_back(hops);
  }

  constexpr int kIps = 100;
  for (int i = 0; i < kIps; ++i) {
    Address128 ip{};
    rng.fill(ip);
    const auto a = lizard_encode(ip);
    const auto c = encrypt(p.n * a, GroupElement::base_mul(p.s), rng);
    Cyphertext ten = c;
    for (auto t : all_triples())
      ten = translate(ten, step_from[t.index], step_to[t.index], Scalar::random_nonzero(rng));
    const auto reference = decrypt(ten, q.s);
    ck.expect(reference == q.n * a, "ten-step result differs from the assembled key");
    for (const auto& hops : subsets) {
      Cyphertext three = c;
      for (const auto& h : hops) three = translate(three, h.from, h.to, Scalar::random_nonzero(rng));
      ck.expect(decrypt(three, q.s) == reference, "three-step result differs from ten-step");
    }
  }
  return ck.done("10 pairs miss a share, 10 triples cover all; " + std::to_string(kIps) +
                 " IPs x 10 subsets: ten-step == three-step");
}

// 3 ------------------------------------------------------------------------
Outcome proof_suite() {
  constexpr int kHonest = 1000, kMutations = 1000, kForgeries = 10000;
  DeterministicRandom rng(103);
  Check ck;
  int honest = 0, rejected = 0, accepted_forgeries = 0;

  struct Sample {
    Triplet dh_t;
    DHCertificate dh;
    Cyphertext c_in, c_out;
    GroupElement sB, nB;
    RSKCertificate rsk;
    ExponentScalar e;
    GroupElement key;
    DerivationProof der;
    std::size_t table;
  };
  std::vector<PowersTable> tables;
  std::vector<Scalar> masters;
  std::vector<Sample> samples;
  for (int i = 0; i < kHonest; ++i) {
    if (i % 100 == 0) {
      masters.push_back(Scalar::random_nonzero(rng));
      tables.push_back(powers_table(masters.back()));
    }
    auto nonces = NonceStream::fresh(rng);
    Sample s;
    const auto a = Scalar::random_nonzero(rng);
    const auto A = GroupElement::base_mul(a), M = random_element(rng);
    auto [N, cert] = dh_prove(a, A, M, rng);
    s.dh_t = {A, M, N};
    s.dh = cert;
    s.c_in = encrypt(random_element(rng), random_element(rng), rng);
    const auto sk = Scalar::random_nonzero(rng), nk = Scalar::random_nonzero(rng), r = Scalar::random_nonzero(rng);
    s.c_out = rsk(s.c_in, sk, nk, r);
    s.sB = GroupElement::base_mul(sk);
    s.nB = GroupElement::base_mul(nk);
    s.rsk = rsk_prove(s.c_in, s.c_out, sk, nk, r, nonces);
    s.e = hash_id("party-" + std::to_string(i));
    s.table = tables.size() - 1;
    s.der = derivation_prove(masters.back(), s.e, nonces);
    s.key = GroupElement::base_mul(derive_share(masters.back(), s.e));
    const bool ok = dh_verify(s.dh_t, s.dh) && rsk_verify(s.c_in, s.c_out, s.sB, s.nB, s.rsk) &&
                    derivation_verify(tables[s.table], s.e, s.key, s.der);
    honest += ok;
    samples.push_back(std::move(s));
  }
  ck.expect(honest == kHonest, std::to_string(kHonest - honest) + " honest certificate sets rejected");

  for (int i = 0; i < kMutations; ++i) {
    auto s = samples[static_cast<std::size_t>(i) % samples.size()];
    const auto delta = random_element(rng);
    bool accepted = false;
    switch (i % 3) {
      case 0: {
        auto t = s.dh_t;
        auto c = s.dh;
        switch ((i / 3) % 6) {
          case 0: c.r_m += delta; break;
          case 1: c.r_b += delta; break;
          case 2: c.s += Scalar::random_nonzero(rng); break;
          case 3: t.a += delta; break;
          case 4: t.m += delta; break;
          default: t.n += delta; break;
        }
        accepted = dh_verify(t, c);
        break;
      }
      case 1: {
        auto cert = s.rsk;
        auto c_out = s.c_out;
        switch ((i / 3) % 8) {
          case 0: cert.s_point += delta; break;
          case 1: cert.n_point += delta; break;
          case 2: cert.k_point += delta; break;
          case 3: cert.r_point += delta; break;
          case 4: cert.r_tau += delta; break;
          case 5: cert.certs[static_cast<std::size_t>(i) % 5].s += Scalar::one(); break;
          case 6: c_out.blinding += delta; break;
          default: c_out.core += delta; break;
        }
        accepted = rsk_verify(s.c_in, c_out, s.sB, s.nB, cert);
        break;
      }
      default: {
        auto der = s.der;
        auto key = s.key;
        if (der.chain.links.empty() || (i / 3) % 3 == 0) {
          key += delta;
        } else {
          auto& link = der.chain.links[static_cast<std::size_t>(i) % der.chain.links.size()];
          if ((i / 3) % 3 == 1) link.product += delta;
          else link.cert.s += Scalar::one();
        }
        accepted = derivation_verify(tables[s.table], s.e, key, der);
        break;
      }
    }
    rejected += !accepted;
  }
  ck.expect(rejected == kMutations, std::to_string(kMutations - rejected) + " mutations accepted");

  for (int i = 0; i < kForgeries; ++i) {
    const auto a = Scalar::random_nonzero(rng), m = Scalar::random_nonzero(rng);
    const Triplet t{GroupElement::base_mul(a), GroupElement::base_mul(m), GroupElement::base_mul(a * m + Scalar::one())};
    DHCertificate forged{random_element(rng), random_element(rng), Scalar::random(rng)};
    if (i % 2) {
      // Reuse a valid certificate from an unrelated true triplet.
      forged = samples[static_cast<std::size_t>(i) % samples.size()].dh;
    }
    accepted_forgeries += dh_verify(t, forged);
  }
  ck.expect(accepted_forgeries == 0, std::to_string(accepted_forgeries) + " forgeries accepted");
  return ck.done(std::to_string(honest) + " honest DH+RSK+derivation sets verify, " + std::to_string(rejected) +
                 " mutations rejected, " + std::to_string(kForgeries) + " forgeries: " +
                 std::to_string(accepted_forgeries) + " accepted");
}

// 4 ------------------------------------------------------------------------
Outcome lizard_suite() {
  constexpr int kRoundtrips = 100000;
  Check ck;
  // Produced by tests/oracle/ristretto_oracle.py.
  const std::pair<const char*, const char*> golden[] = {
      {"00000000000000000000000000000000", "2ecf01125952b83791f6e437e4b651152553f9a1c0523eb69a26235243cbe742"},
      {"ffffffffffffffffffffffffffffffff", "98eae89bcd96931eade34f110e2c6482a3230c9354c2cb43ff7b93a14718fb72"},
      {"00000000000000000000ffffc0000201", "5a388d36665fcfaf1f49958f1bd7a8167bdea1dc5157bfd6656eed55cde03d70"},
      {"20010db8000000000000000000000001", "6292aba4257465c5fa62fbf64e2299b7befc6b6089472ff4a1114f09eafdb854"},
      {"000102030405060708090a0b0c0d0e0f", "60a3843e3b499672937b86b84f66ac5d5b3db9dd65994ad8b021cd304a0dfc48"},
      {"00000000000000000000000000000001", "da5e6ea7832281b380a1dcf6b0eadbeb93720052c6dce08b0a54b84125df9164"},
  };
  int golden_ok = 0;
  for (const auto& [in, out] : golden) {
    const auto w = *hex_to_array<16>(in);
    const auto a = lizard_encode(w);
    const bool ok = a.to_hex() == out && lizard_decode(a) == w;
    ck.expect(ok, std::string("golden vector ") + in);
    golden_ok += ok;
  }
  DeterministicRandom rng(104);
  int exact = 0, ambiguous = 0;
  for (int i = 0; i < kRoundtrips; ++i) {
    Address128 w{};
    rng.fill(w);
    try {
      exact += lizard_decode(lizard_encode(w)) == w;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::AmbiguousDecode) throw;
      ++ambiguous;
    }
  }
  ck.expect(exact == kRoundtrips, std::to_string(kRoundtrips - exact) + " roundtrips inexact (" +
                                      std::to_string(ambiguous) + " ambiguous)");
  return ck.done(std::to_string(exact) + " random roundtrips exact, " + std::to_string(golden_ok) +
                 " golden vectors match");
}

// 5 ------------------------------------------------------------------------
Outcome end_to_end() {
  Check ck;
  const auto dir = scratch_dir("pipeline");
  const auto config_path = (dir / "cluster.json").string();
  SetupOptions so;
  so.state_dir = (dir / "state").string();
  const auto cfg = setup_cluster(config_path, so);

  DeterministicRandom rng(105);
  const auto csv_path = (dir / "flows.csv").string();
  {
    std::ofstream out(csv_path);
    write_flows_csv(out, synthetic_flows(1000, 300, rng));
  }
  std::ifstream in(csv_path);
  const auto flows = read_flows_csv(in);
  ck.expect(flows.size() == 1000, "CSV has " + std::to_string(flows.size()) + " flows");
  const auto sf_id = cfg.party_with_role(Role::Storage);

  // Pick a flow whose start time is unique so a plain-column query finds it.
  std::map<std::int64_t, int> ts_count;
  for (const auto& f : flows) ++ts_count[f.ts_start];
  const PlainFlow* known = nullptr;
  for (const auto& f : flows)
    if (ts_count[f.ts_start] == 1) {
      known = &f;
      break;
    }
  if (!known) return {false, "no flow with a unique start time"};
  const auto by_ts = "where ts_start = " + std::to_string(known->ts_start);
  const auto expected_src_count =
      std::count_if(flows.begin(), flows.end(), [&](const PlainFlow& f) { return f.src == known->src; });

  GroupElement researcher_pseudonym, stored_point;
  {
    ClusterOptions opts;
    opts.tcp = true;
    auto cluster = LocalCluster::from_state(cfg, opts);
    auto mp = cluster->party("mp");
    auto sf_mp = cluster->storage_client(*mp);
    const auto rep = pseudonymise_flows(*mp, sf_mp, cluster->ca(), sf_id, flows);
    ck.expect(rep.stored == 1000 && cluster->table().size() == 1000, "stored " + std::to_string(rep.stored));
    ck.expect(rep.sampling.detections.empty(), "proof sampling failed during ingest");

    auto researcher = cluster->party("researcher");
    auto sf_r = cluster->storage_client(*researcher);
    ck.expect(retrieve_as(*researcher, sf_r, cluster->ca(), sf_id, "select count", {}).plain.count == 1000u,
              "full count differs from input");
    const auto row = retrieve_as(*researcher, sf_r, cluster->ca(), sf_id, "select src_ip, bytes " + by_ts, {});
    ck.expect(row.plain.rows.size() == 1, "known flow not found by start time");
    if (row.plain.rows.size() == 1) {
      researcher_pseudonym = std::get<GroupElement>(row.plain.rows[0][0]);
      ck.expect(std::get<std::uint64_t>(row.plain.rows[0][1]) == known->bytes, "byte counter differs");
      const auto by_pseudonym = retrieve_as(*researcher, sf_r, cluster->ca(), sf_id, "select count where src_ip = $1",
                                            {researcher_pseudonym});
      ck.expect(by_pseudonym.plain.count == static_cast<std::uint64_t>(expected_src_count),
                "retrieval by researcher pseudonym returned the wrong number of flows");
    }

    auto inv = cluster->party("investigator");
    auto sf_i = cluster->storage_client(*inv);
    const auto ev = retrieve_as(*inv, sf_i, cluster->ca(), sf_id, "select src_ip " + by_ts, {});
    ck.expect(ev.encrypted.rows.size() == 1, "investigator did not find the flow");
    if (ev.encrypted.rows.size() == 1) {
      const auto c = std::get<Cyphertext>(ev.encrypted.rows[0][0]);
      const auto warrant = cluster->ca().issue("investigator", Mode::Depseudonymise, {"investigator"}, {"investigator"}, c);
      const auto ip = investigate_depseudonymise(*inv, c, warrant);
      ck.expect(ip == address128_to_ip(known->src), "depseudonymised " + ip + ", expected " + address128_to_ip(known->src));
    }
    for (const auto& f : cluster->table().rows()) {
      if (f.ts_start == known->ts_start) stored_point = f.src;
    }
  }
  {
    // Restart from disk with a different active subset.
    auto cfg2 = cfg;
    cfg2.active = ActiveSet{PeerId::B, PeerId::D, PeerId::E};
    auto cluster = LocalCluster::from_state(cfg2);
    ck.expect(cluster->table().size() == 1000, "table not reloaded");
    auto mp = cluster->party("mp");
    auto sf_mp = cluster->storage_client(*mp);
    pseudonymise_flows(*mp, sf_mp, cluster->ca(), sf_id, {*known});
    const auto rows = cluster->table().rows();
    ck.expect(rows.size() == 1001 && rows.back().src == stored_point, "stored pseudonym changed after restart");
    auto researcher = cluster->party("researcher");
    auto sf_r = cluster->storage_client(*researcher);
    const auto row = retrieve_as(*researcher, sf_r, cluster->ca(), sf_id, "select src_ip " + by_ts, {});
    ck.expect(row.plain.rows.size() == 2, "restart query");
    for (const auto& r : row.plain.rows)
      ck.expect(std::get<GroupElement>(r[0]) == researcher_pseudonym, "researcher pseudonym changed after restart");
  }
  fs::remove_all(dir);
  return ck.done("1000 flows stored, counted and retrieved by pseudonym; warrant recovered " +
                 address128_to_ip(known->src) + "; pseudonyms stable across restart");
}

// 6 ------------------------------------------------------------------------
Outcome adversaries() {
  Check ck;
  std::ostringstream summary;
  struct Run {
    double q;
    std::uint64_t n, trials;
  };
  const Run runs[] = {{0.01, 100, 100}, {0.01, 1000, 10}, {0.1, 10, 200}, {1.0, 5, 20}};
  std::uint64_t seed = 600;
  for (const auto& run : runs) {
    AdversaryScript s;
    s.peers = {static_cast<PeerId>(seed % kPeerCount)};
    s.kind = Misbehaviour::CorruptResult;
    s.sampling = run.q;
    s.ops = run.n;
    s.trials = run.trials;
    s.seed = seed++;
    const auto rep = run_adversary(s);
    char buf[160];
    std::snprintf(buf, sizeof buf, "q=%g n=%llu: %.3f vs %.3f; ", run.q, static_cast<unsigned long long>(run.n),
                  rep.empirical_rate, rep.expected_rate);
    summary << buf;
    ck.expect(rep.within_3sigma, std::string("outside 3 sigma at ") + buf);
    ck.expect(rep.identified == s.peers || !rep.detected, "wrong peer blamed");
    if (run.q == 1.0) ck.expect(rep.first_op == 1u, "q=1 not detected on the first operation");
  }
  int pairs = 0;
  for (int a = 0; a < kPeerCount; ++a) {
    for (int b = a + 1; b < kPeerCount; ++b) {
      AdversaryScript s;
      s.peers = {static_cast<PeerId>(a), static_cast<PeerId>(b)};
      s.kind = Misbehaviour::WrongEnrolmentShare;
      s.seed = seed++;
      const auto rep = run_adversary(s);
      const bool ok = rep.detected && rep.identified == s.peers;
      ck.expect(ok, "liars " + std::string(1, peer_letter(s.peers[0])) + peer_letter(s.peers[1]) + " not identified");
      pairs += ok;
    }
  }
  summary << "enrolment liars identified for " << pairs << "/10 pairs";
  return ck.done(summary.str());
}

// 7 ------------------------------------------------------------------------
Outcome performance() {
  Check ck;
  const auto rep = run_bench(10000, 300, 107);
  std::map<std::string, BenchEntry> by;
  for (const auto& e : rep.entries) by[e.name] = e;
  auto ops_are = [&](const std::string& name, std::uint64_t general, std::uint64_t base) {
    const auto& o = by[name].ops;
    ck.expect(o.general == general && o.base == base && o.dual == 0,
              name + " uses " + std::to_string(o.general) + "+" + std::to_string(o.base));
  };
  ops_are("encrypt", 1, 1);
  ops_are("decrypt", 1, 0);
  ops_are("rsk", 4, 1);
  ops_are("rsk_fixed_target", 3, 1);
  ck.expect(rep.unique_per_minute >= 20000, "throughput below 20000 unique/min");
  char buf[200];
  std::snprintf(buf, sizeof buf, "%.0f unique IPs/min (%.1fx the floor; %s); op counts encrypt 1+1, decrypt 1, "
                "rsk 4+1, fixed-target 3+1",
                rep.unique_per_minute, rep.unique_per_minute / 20000.0, rep.hardware.c_str());
  return ck.done(buf);
}

// 8 ------------------------------------------------------------------------
int run_cli(const std::vector<std::string>& args) {
  std::string cmd = "'" PEP3_CLI_PATH "'";
  for (const auto& a : args) cmd += " '" + a + "'";
  cmd += " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome setup_protocol() {
  Check ck;
  const auto dir = scratch_dir("setup");
  const auto config = (dir / "honest.json").string();
  ck.expect(run_cli({"--config", config, "setup", "--state-dir", (dir / "honest").string()}) == 0, "honest setup failed");
  if (fs::exists(config)) {
    const auto cfg = ClusterConfig::load(config);
    const auto keys = Keyring::load(cfg.state_dir);
    std::array<MasterSecrets, kPeerCount> ms;
    for (auto p : kAllPeers) ms[peer_index(p)] = MasterSecrets::load(master_path(cfg.state_dir, p), keys.file_keys[peer_index(p)]);
    for (auto t : all_triples()) {
      for (auto p : kAllPeers) {
        const auto& pub = ms[peer_index(p)].publics(t);
        const auto& ref = ms[0].publics(t);
        ck.expect(pub.n_powers == ref.n_powers && pub.s_powers == ref.s_powers, "powers tables differ between peers");
        if (ms[peer_index(p)].holds(t)) {
          const auto& sec = ms[peer_index(p)].secrets(t);
          ck.expect(powers_table(sec.n) == pub.n_powers && powers_table(sec.s) == pub.s_powers,
                    "published table does not match the triple secret");
        }
      }
    }
  }
  int aborted = 0;
  constexpr int kTrials = 50;
  for (int i = 0; i < kTrials; ++i) {
    const char* kind = i % 2 ? "bad-missive" : "bad-setup-public";
    const std::string peer(1, peer_letter(static_cast<PeerId>(i % kPeerCount)));
    const auto cfg_path = (dir / ("trial-" + std::to_string(i) + ".json")).string();
    const int code = run_cli({"--config", cfg_path, "setup", "--state-dir", (dir / ("trial-" + std::to_string(i))).string(),
                              "--inject", std::string(kind) + ":" + peer});
    const bool ok = code == 3 && !fs::exists(cfg_path);
    ck.expect(ok, std::string(kind) + ":" + peer + " exited " + std::to_string(code));
    aborted += ok;
  }
  fs::remove_all(dir);
  return ck.done("honest setup consistent; " + std::to_string(aborted) + "/" + std::to_string(kTrials) +
                 " scripted inconsistencies aborted with exit code 3");
}

}  // namespace

int main() {
  const std::pair<int, std::function<Outcome()>> criteria[] = {
      {1, crypto_roundtrips}, {2, share_algebra}, {3, proof_suite}, {4, lizard_suite},
      {5, end_to_end},        {6, adversaries},   {7, performance}, {8, setup_protocol},
  };
  const double limits[] = {30, 0, 120, 0, 120, 0, 0, 0};
  int failed = 0;
  for (const auto& [n, fn] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const double limit = limits[n - 1];
    if (limit > 0 && secs > limit) {
      o.pass = false;
      o.detail += " (over the " + std::to_string(static_cast<int>(limit)) + " s limit)";
    }
    char t[32];
    std::snprintf(t, sizeof t, "%.1f", secs);
    std::cout << "criterion " << n << ": " << (o.pass ? "PASS" : "FAIL") << " - " << o.detail << " [" << t << " s]"
              << std::endl;
    failed += !o.pass;
  }
  return failed == 0 ? 0 : 1;
}
