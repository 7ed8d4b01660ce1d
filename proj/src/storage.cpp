#include "pep3/storage.hpp"

#include <algorithm>
#include <filesystem>
#include <mutex>

#include "pep3/proofs.hpp"

namespace pep3 {
namespace {

constexpr char kMagic[8] = {'P', 'E', 'P', '3', 'S', 'F', '0', '1'};

std::string point_key(const GroupElement& p) {
  const auto e = p.encode();
  return std::string(e.begin(), e.end());
}

std::uint64_t plain_value(const StoredFlow& f, Column c) {
  switch (c) {
    case Column::TsStart: return static_cast<std::uint64_t>(f.ts_start);
    case Column::TsEnd: return static_cast<std::uint64_t>(f.ts_end);
    case Column::SrcPort: return f.src_port;
    case Column::DstPort: return f.dst_port;
    case Column::Proto: return f.proto;
    case Column::Packets: return f.packets;
    case Column::Bytes: return f.bytes;
    default: break;
  }
  throw Error(ErrorCode::InvalidArgument, "not a plain column");
}

bool compare(std::uint64_t a, CmpOp op, std::uint64_t b) {
  switch (op) {
    case CmpOp::Eq: return a == b;
    case CmpOp::Ne: return a != b;
    case CmpOp::Lt: return a < b;
    case CmpOp::Le: return a <= b;
    case CmpOp::Gt: return a > b;
    case CmpOp::Ge: return a >= b;
  }
  return false;
}

}  // namespace

Bytes encode_result(const ResultSet<Cyphertext>& r) {
  ByteWriter w;
  w.u8(r.count ? 1 : 0);
  if (r.count) {
    w.u64(*r.count);
    return w.take();
  }
  w.u16(static_cast<std::uint16_t>(r.columns.size()));
  for (auto c : r.columns) w.u8(static_cast<std::uint8_t>(c));
  w.u32(static_cast<std::uint32_t>(r.rows.size()));
  for (const auto& row : r.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (is_pseudonym_column(r.columns[i])) write_cyphertext(w, std::get<Cyphertext>(row[i]));
      else w.u64(std::get<std::uint64_t>(row[i]));
    }
  }
  return w.take();
}

ResultSet<Cyphertext> decode_result(std::span<const std::uint8_t> in) {
  ByteReader r(in);
  ResultSet<Cyphertext> out;
  const auto kind = r.u8();
  if (kind > 1) throw Error(ErrorCode::Malformed, "result kind");
  if (kind == 1) {
    out.count = r.u64();
    r.expect_done();
    return out;
  }
  const auto ncols = r.u16();
  for (int i = 0; i < ncols; ++i) {
    const auto c = r.u8();
    if (c > static_cast<std::uint8_t>(Column::Bytes)) throw Error(ErrorCode::Malformed, "column id");
    out.columns.push_back(static_cast<Column>(c));
  }
  const auto nrows = r.u32();
  for (std::uint32_t i = 0; i < nrows; ++i) {
    std::vector<ResultSet<Cyphertext>::Value> row;
    for (auto c : out.columns) {
      if (is_pseudonym_column(c)) row.emplace_back(read_cyphertext(r));
      else row.emplace_back(r.u64());
    }
    out.rows.push_back(std::move(row));
  }
  r.expect_done();
  return out;
}

FlowTable::FlowTable(const std::string& path) : path_(path) {
  if (std::filesystem::exists(path)) {
    std::ifstream in(path, std::ios::binary);
    char magic[8]{};
    in.read(magic, 8);
    if (in.gcount() != 8 || !std::equal(magic, magic + 8, kMagic))
      throw Error(ErrorCode::Malformed, "not a flow table: " + path);
    std::array<std::uint8_t, kStoredRowBytes> row{};
    while (in.read(reinterpret_cast<char*>(row.data()), kStoredRowBytes)) {
      rows_.push_back(decode_stored_flow(row));
      index(rows_.size() - 1);
    }
    if (in.gcount() != 0) throw Error(ErrorCode::Malformed, "truncated row in " + path);
    log_.open(path, std::ios::binary | std::ios::app);
  } else {
    log_.open(path, std::ios::binary | std::ios::trunc);
    log_.write(kMagic, 8);
  }
  if (!log_) throw Error(ErrorCode::Io, "cannot open " + path);
  log_.flush();
}

void FlowTable::index(std::size_t i) {
  by_src_[point_key(rows_[i].src)].push_back(static_cast<std::uint32_t>(i));
  by_dst_[point_key(rows_[i].dst)].push_back(static_cast<std::uint32_t>(i));
}

std::size_t FlowTable::append(std::span<const StoredFlow> rows) {
  std::unique_lock lock(mu_);
  for (const auto& f : rows) {
    if (path_) {
      const auto enc = encode_stored_flow(f);
      log_.write(reinterpret_cast<const char*>(enc.data()), enc.size());
    }
    rows_.push_back(f);
    index(rows_.size() - 1);
  }
  if (path_) {
    log_.flush();
    if (!log_) throw Error(ErrorCode::Io, "write failed on " + *path_);
  }
  return rows.size();
}

std::size_t FlowTable::size() const {
  std::shared_lock lock(mu_);
  return rows_.size();
}

std::vector<StoredFlow> FlowTable::rows() const {
  std::shared_lock lock(mu_);
  return rows_;
}

ResultSet<GroupElement> FlowTable::evaluate(const Query& q, std::span<const GroupElement> args) const {
  if (args.size() != q.arg_count())
    throw Error(ErrorCode::InvalidArgument, "query expects " + std::to_string(q.arg_count()) + " arguments, got " +
                                                std::to_string(args.size()));
  std::shared_lock lock(mu_);
  // Narrow the scan through the index when a pseudonym term exists.
  const std::vector<std::uint32_t>* candidates = nullptr;
  static const std::vector<std::uint32_t> kEmpty;
  for (const auto& t : q.where) {
    if (!t.pseudonym) continue;
    const auto& idx = t.column == Column::SrcIp ? by_src_ : by_dst_;
    auto it = idx.find(point_key(args[t.arg_index]));
    const auto* hits = it == idx.end() ? &kEmpty : &it->second;
    if (!candidates || hits->size() < candidates->size()) candidates = hits;
  }
  auto matches = [&](const StoredFlow& f) {
    for (const auto& t : q.where) {
      if (t.pseudonym) {
        const auto& p = t.column == Column::SrcIp ? f.src : f.dst;
        if (!(p == args[t.arg_index])) return false;
      } else if (!compare(plain_value(f, t.column), t.op, t.literal)) {
        return false;
      }
    }
    return true;
  };
  std::vector<std::uint32_t> hit;
  if (candidates) {
    for (auto i : *candidates)
      if (matches(rows_[i])) hit.push_back(i);
  } else {
    for (std::uint32_t i = 0; i < rows_.size(); ++i)
      if (matches(rows_[i])) hit.push_back(i);
  }
  ResultSet<GroupElement> out;
  if (q.count) {
    out.count = hit.size();
    return out;
  }
  if (q.order_by) {
    const Column c = *q.order_by;
    std::stable_sort(hit.begin(), hit.end(), [&](std::uint32_t a, std::uint32_t b) {
      const auto va = plain_value(rows_[a], c), vb = plain_value(rows_[b], c);
      return q.descending ? va > vb : va < vb;
    });
  }
  if (q.limit && hit.size() > *q.limit) hit.resize(*q.limit);
  out.columns = q.projection;
  for (auto i : hit) {
    const auto& f = rows_[i];
    std::vector<ResultSet<GroupElement>::Value> row;
    for (auto c : q.projection) {
      if (c == Column::SrcIp) row.emplace_back(f.src);
      else if (c == Column::DstIp) row.emplace_back(f.dst);
      else row.emplace_back(plain_value(f, c));
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

StorageNode::StorageNode(std::string id, SigningKey auth_key, const Directory& directory, Scalar encryption_key,
                         FlowTable& table, RandomSource& rng)
    : Service(std::move(id), std::move(auth_key), directory),
      key_(encryption_key),
      public_(GroupElement::base_mul(encryption_key)),
      table_(table),
      rng_(rng) {}

GroupElement StorageNode::open(const Cyphertext& c) const {
  if (!(c.target == public_)) throw Error(ErrorCode::Malformed, "cyphertext is not encrypted for " + id());
  return decrypt(c, key_);
}

std::size_t StorageNode::ingest(std::span<const EncryptedFlow> flows) {
  std::vector<StoredFlow> rows;
  rows.reserve(flows.size());
  for (const auto& f : flows) rows.push_back(f.map<GroupElement>([&](const Cyphertext& c) { return open(c); }));
  return table_.append(rows);
}

ResultSet<Cyphertext> StorageNode::query(const std::string& text, std::span<const Cyphertext> args) const {
  const Query q = parse_query(text);
  std::vector<GroupElement> points;
  points.reserve(args.size());
  for (const auto& c : args) points.push_back(open(c));
  const auto res = table_.evaluate(q, points);
  ResultSet<Cyphertext> out;
  out.columns = res.columns;
  out.count = res.count;
  for (const auto& row : res.rows) {
    std::vector<ResultSet<Cyphertext>::Value> enc;
    for (const auto& v : row) {
      if (const auto* p = std::get_if<GroupElement>(&v)) enc.emplace_back(encrypt(*p, public_, rng_));
      else enc.emplace_back(std::get<std::uint64_t>(v));
    }
    out.rows.push_back(std::move(enc));
  }
  return out;
}

Frame StorageNode::handle(const std::string& client, const Frame& request) {
  const auto role = directory().at(client).role;
  switch (request.tag) {
    case MsgTag::SfIngest: {
      if (role != Role::Metering) throw Error(ErrorCode::Unauthenticated, client + " may not ingest");
      ByteReader r(request.payload);
      const auto n = r.u32();
      if (n > r.remaining() / (37 + 192)) throw Error(ErrorCode::Malformed, "flow count");
      std::vector<EncryptedFlow> flows;
      flows.reserve(n);
      for (std::uint32_t i = 0; i < n; ++i) flows.push_back(read_encrypted_flow(r));
      r.expect_done();
      ByteWriter w;
      w.u64(ingest(flows));
      return {MsgTag::SfIngestAck, w.take()};
    }
    case MsgTag::SfQuery: {
      if (role != Role::Researcher && role != Role::Investigator)
        throw Error(ErrorCode::Unauthenticated, client + " may not query");
      ByteReader r(request.payload);
      const auto text = r.str();
      const auto n = r.u32();
      if (n > r.remaining() / 96) throw Error(ErrorCode::Malformed, "argument count");
      std::vector<Cyphertext> args;
      for (std::uint32_t i = 0; i < n; ++i) args.push_back(read_cyphertext(r));
      r.expect_done();
      return {MsgTag::SfQueryResult, encode_result(query(text, args))};
    }
    default:
      throw Error(ErrorCode::Malformed, "unsupported message for the storage facility");
  }
}

std::uint64_t StorageClient::ingest(std::span<const EncryptedFlow> flows) {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(flows.size()));
  for (const auto& f : flows) write_encrypted_flow(w, f);
  const auto reply = ch_.call(MsgTag::SfIngest, w.take(), MsgTag::SfIngestAck);
  ByteReader r(reply);
  const auto n = r.u64();
  r.expect_done();
  return n;
}

ResultSet<Cyphertext> StorageClient::query(const std::string& text, std::span<const Cyphertext> args) {
  ByteWriter w;
  w.str(text).u32(static_cast<std::uint32_t>(args.size()));
  for (const auto& c : args) write_cyphertext(w, c);
  return decode_result(ch_.call(MsgTag::SfQuery, w.take(), MsgTag::SfQueryResult));
}

}  // namespace pep3
