#include "plume/snapshot.hpp"

#include "plume/digest.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <type_traits>

namespace plume::io {

static_assert(std::endian::native == std::endian::little, "snapshot encoding assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'P', 'L', 'M', 'P'};
enum Kind : std::uint32_t { kPolicy = 0, kCheckpoint = 1 };

class Writer {
 public:
  template <typename T>
    requires std::is_arithmetic_v<T>
  void put(T v) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
    bytes_.insert(bytes_.end(), p, p + sizeof(T));
  }
  void put_raw(std::span<const char> raw) { bytes_.insert(bytes_.end(), raw.begin(), raw.end()); }
  void put_floats(const std::vector<float>& v) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(v.data());
    bytes_.insert(bytes_.end(), p, p + v.size() * sizeof(float));
  }
  void put_string(const std::string& s) {
    put(static_cast<std::uint32_t>(s.size()));
    bytes_.insert(bytes_.end(), s.begin(), s.end());
  }
  std::vector<std::uint8_t> finish() {
    const Sha256 d = sha256(bytes_);
    bytes_.insert(bytes_.end(), d.begin(), d.end());
    return std::move(bytes_);
  }

 private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : b_(b) {}
  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, b_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  void get_floats(std::vector<float>& v) {
    need(v.size() * sizeof(float));
    std::memcpy(v.data(), b_.data() + pos_, v.size() * sizeof(float));
    pos_ += v.size() * sizeof(float);
  }
  std::string get_string() {
    const auto n = get<std::uint32_t>();
    need(n);
    std::string s(reinterpret_cast<const char*>(b_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == b_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > b_.size()) throw ArtifactError("snapshot truncated");
  }
  std::span<const std::uint8_t> b_;
  std::size_t pos_ = 0;
};

void put_header(Writer& w, Kind kind, const rl::PolicySnapshot& s, const std::string& hash) {
  w.put_raw(kMagic);
  w.put(kSnapshotVersion);
  w.put(static_cast<std::uint32_t>(kind));
  w.put_string(hash);
  const auto& n = s.spec;
  for (int v : {n.in_channels, n.height, n.width, n.actions, n.trunk, static_cast<int>(n.convs.size())})
    w.put(static_cast<std::int32_t>(v));
  for (const auto& c : n.convs)
    for (int v : {c.filters, c.kernel, c.stride}) w.put(static_cast<std::int32_t>(v));
  for (double v : {s.actions.v_forward, s.actions.v_lat, s.actions.v_vert, s.actions.m}) w.put(v);
  const auto& p = s.partition;
  for (double v : {p.f1, p.f2, p.f3, p.f4, p.g1, p.g2}) w.put(v);
  w.put(static_cast<std::uint32_t>(s.params.tensors.size()));
  for (const auto& t : s.params.tensors) {
    w.put(static_cast<std::uint32_t>(t.shape.size()));
    for (int d : t.shape) w.put(static_cast<std::int32_t>(d));
    w.put_floats(t.data);
  }
}

struct Decoded {
  Kind kind = kPolicy;
  std::string hash;
  rl::PolicySnapshot snap;
};

Decoded read_header(Reader& r) {
  Decoded d;
  char magic[4];
  for (char& c : magic) c = r.get<char>();
  if (std::memcmp(magic, kMagic, 4) != 0) throw ArtifactError("not a PLMP snapshot");
  const auto version = r.get<std::uint32_t>();
  if (version != kSnapshotVersion) throw ArtifactError("unsupported snapshot version " + std::to_string(version));
  const auto kind = r.get<std::uint32_t>();
  if (kind != kPolicy && kind != kCheckpoint) throw ArtifactError("unknown snapshot kind");
  d.kind = static_cast<Kind>(kind);
  d.hash = r.get_string();

  auto& n = d.snap.spec;
  n.in_channels = r.get<std::int32_t>();
  n.height = r.get<std::int32_t>();
  n.width = r.get<std::int32_t>();
  n.actions = r.get<std::int32_t>();
  n.trunk = r.get<std::int32_t>();
  const int convs = r.get<std::int32_t>();
  if (convs < 0 || convs > 64) throw ArtifactError("implausible conv count");
  n.convs.clear();
  for (int i = 0; i < convs; ++i) {
    nn::ConvSpec c;
    c.filters = r.get<std::int32_t>();
    c.kernel = r.get<std::int32_t>();
    c.stride = r.get<std::int32_t>();
    n.convs.push_back(c);
  }
  try {
    n.validate();
  } catch (const Error& e) {
    throw ArtifactError(std::string("unsupported network layout: ") + e.what());
  }
  auto& a = d.snap.actions;
  a.v_forward = r.get<double>();
  a.v_lat = r.get<double>();
  a.v_vert = r.get<double>();
  a.m = r.get<double>();
  auto& p = d.snap.partition;
  p.f1 = r.get<double>();
  p.f2 = r.get<double>();
  p.f3 = r.get<double>();
  p.f4 = r.get<double>();
  p.g1 = r.get<double>();
  p.g2 = r.get<double>();

  const auto shapes = n.param_shapes();
  const auto count = r.get<std::uint32_t>();
  if (count != shapes.size()) throw ArtifactError("parameter count does not match the network");
  for (const auto& want : shapes) {
    const auto rank = r.get<std::uint32_t>();
    std::vector<int> shape(rank);
    for (auto& s : shape) s = r.get<std::int32_t>();
    if (shape != want) throw ArtifactError("parameter shape mismatch");
    nn::Tensor<float> t(shape);
    r.get_floats(t.data);
    d.snap.params.tensors.push_back(std::move(t));
  }
  return d;
}

std::span<const std::uint8_t> verified_body(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 + 32) throw ArtifactError("snapshot truncated");
  const auto body = bytes.first(bytes.size() - 32);
  const Sha256 d = sha256(body);
  if (std::memcmp(d.data(), bytes.data() + body.size(), 32) != 0) throw ArtifactError("snapshot digest mismatch");
  return body;
}

void put_flat(Writer& w, const std::vector<std::vector<float>>& v) {
  w.put(static_cast<std::uint32_t>(v.size()));
  for (const auto& x : v) {
    w.put(static_cast<std::uint64_t>(x.size()));
    w.put_floats(x);
  }
}

std::vector<std::vector<float>> get_flat(Reader& r, const nn::Parameters<float>& like) {
  const auto n = r.get<std::uint32_t>();
  if (n != like.tensors.size()) throw ArtifactError("optimiser state does not match the network");
  std::vector<std::vector<float>> out(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto len = r.get<std::uint64_t>();
    if (len != like.tensors[i].size()) throw ArtifactError("optimiser state does not match the network");
    out[i].resize(len);
    r.get_floats(out[i]);
  }
  return out;
}

}  // namespace

rl::TrainState Checkpoint::train_state() const {
  rl::TrainState s;
  s.params = policy.params;
  s.opt = opt;
  s.update = update;
  s.steps_done = steps_done;
  s.curve = curve;
  return s;
}

Checkpoint Checkpoint::from(const rl::TrainState& s, const nn::NetworkSpec& spec, const rl::ActionTable& actions,
                            const rl::RegionPartition& partition) {
  Checkpoint c;
  c.policy = {spec, actions, partition, s.params};
  c.opt = s.opt;
  c.update = s.update;
  c.steps_done = s.steps_done;
  c.curve = s.curve;
  return c;
}

std::vector<std::uint8_t> encode_snapshot(const rl::PolicySnapshot& snap, const std::string& hash) {
  Writer w;
  put_header(w, kPolicy, snap, hash);
  return w.finish();
}

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& c, const std::string& hash) {
  Writer w;
  put_header(w, kCheckpoint, c.policy, hash);
  w.put(static_cast<std::int64_t>(c.update));
  w.put(static_cast<std::int64_t>(c.steps_done));
  w.put(c.opt.lr);
  w.put(c.opt.beta1);
  w.put(c.opt.beta2);
  w.put(c.opt.eps);
  w.put(static_cast<std::int64_t>(c.opt.step));
  put_flat(w, c.opt.m);
  put_flat(w, c.opt.v);
  w.put(static_cast<std::uint32_t>(c.curve.size()));
  for (const auto& rec : c.curve) {
    w.put(static_cast<std::int64_t>(rec.update));
    w.put(static_cast<std::int64_t>(rec.step));
    for (double v : {rec.mean_reward, rec.mean_inside_frac, rec.policy_loss, rec.value_loss, rec.entropy, rec.clip_frac})
      w.put(v);
  }
  return w.finish();
}

rl::PolicySnapshot decode_snapshot(std::span<const std::uint8_t> bytes, std::string* hash) {
  Reader r(verified_body(bytes));
  Decoded d = read_header(r);
  if (d.kind == kPolicy && !r.done()) throw ArtifactError("trailing bytes in snapshot");
  if (hash) *hash = d.hash;
  return std::move(d.snap);
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes, std::string* hash) {
  Reader r(verified_body(bytes));
  Decoded d = read_header(r);
  if (d.kind != kCheckpoint) throw ArtifactError("snapshot holds no training state");
  Checkpoint c;
  c.policy = std::move(d.snap);
  c.update = static_cast<int>(r.get<std::int64_t>());
  c.steps_done = static_cast<long>(r.get<std::int64_t>());
  c.opt.lr = r.get<double>();
  c.opt.beta1 = r.get<double>();
  c.opt.beta2 = r.get<double>();
  c.opt.eps = r.get<double>();
  c.opt.step = static_cast<long>(r.get<std::int64_t>());
  c.opt.m = get_flat(r, c.policy.params);
  c.opt.v = get_flat(r, c.policy.params);
  const auto n = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < n; ++i) {
    rl::CurveRecord rec;
    rec.update = static_cast<int>(r.get<std::int64_t>());
    rec.step = static_cast<long>(r.get<std::int64_t>());
    rec.mean_reward = r.get<double>();
    rec.mean_inside_frac = r.get<double>();
    rec.policy_loss = r.get<double>();
    rec.value_loss = r.get<double>();
    rec.entropy = r.get<double>();
    rec.clip_frac = r.get<double>();
    c.curve.push_back(rec);
  }
  if (!r.done()) throw ArtifactError("trailing bytes in checkpoint");
  if (hash) *hash = d.hash;
  return c;
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_file_atomic(const std::filesystem::path& path, const std::string& text) {
  write_file_atomic(path, std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArtifactError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void save_snapshot(const std::filesystem::path& path, const rl::PolicySnapshot& snap, const std::string& hash) {
  write_file_atomic(path, encode_snapshot(snap, hash));
}

rl::PolicySnapshot load_snapshot(const std::filesystem::path& path, std::string* hash) {
  return decode_snapshot(read_file(path), hash);
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt, const std::string& hash) {
  write_file_atomic(path, encode_checkpoint(ckpt, hash));
}

Checkpoint load_checkpoint(const std::filesystem::path& path, std::string* hash) {
  return decode_checkpoint(read_file(path), hash);
}

}  // namespace plume::io
