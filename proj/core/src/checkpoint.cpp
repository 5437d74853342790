#include "dbdl/checkpoint.hpp"

#include "dbdl/errors.hpp"

#include <bit>
#include <fstream>
#include <iterator>
#include <limits>

namespace dbdl {

using Eigen::Index;

namespace {

constexpr std::string_view kMagic = "DBDL";

class Writer {
public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  void f64(double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
  }
  void bytes(std::string_view s) { out_.append(s); }
  void count(Index n) {
    if (n < 0 || n > std::numeric_limits<std::uint32_t>::max()) {
      throw DimensionError("checkpoint: size does not fit in u32");
    }
    u32(static_cast<std::uint32_t>(n));
  }
  std::string take() { return std::move(out_); }

private:
  std::string out_;
};

class Reader {
public:
  explicit Reader(std::string_view in) : in_(in) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(byte(pos_ + i)) << (8 * i);
    pos_ += 4;
    return v;
  }
  double f64() {
    need(8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(byte(pos_ + i)) << (8 * i);
    pos_ += 8;
    return std::bit_cast<double>(bits);
  }
  std::string_view bytes(std::size_t n) {
    need(n);
    auto s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == in_.size(); }

private:
  unsigned char byte(std::size_t i) const { return static_cast<unsigned char>(in_[i]); }
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw FormatError("corrupt checkpoint: truncated file");
  }

  std::string_view in_;
  std::size_t pos_ = 0;
};

} // namespace

std::string serialize_checkpoint(const ModelCheckpoint& cp) {
  cp.validate();
  Writer w;
  w.bytes(kMagic);
  w.u32(kCheckpointVersion);
  w.count(cp.kernel_size);
  w.count(cp.patch_size);
  w.count(cp.dictionary.size());
  for (Index i = 0; i < cp.theta.size(); ++i) w.f64(cp.theta(i));
  const Eigen::MatrixXd& d = cp.dictionary.atoms();
  for (Index r = 0; r < d.rows(); ++r) {
    for (Index c = 0; c < d.cols(); ++c) w.f64(d(r, c));
  }
  const std::string config = to_text(cp.config);
  w.count(static_cast<Index>(config.size()));
  w.bytes(config);
  w.count(static_cast<Index>(cp.trace.size()));
  for (const LossTerms& t : cp.trace) {
    w.f64(t.hr_fidelity);
    w.f64(t.lr_fidelity);
    w.f64(t.sparsity);
  }
  w.u32(cp.dense_blur ? 1 : 0);
  if (cp.dense_blur) {
    const Eigen::MatrixXd& b = *cp.dense_blur;
    w.count(b.rows());
    w.count(b.cols());
    for (Index r = 0; r < b.rows(); ++r) {
      for (Index c = 0; c < b.cols(); ++c) w.f64(b(r, c));
    }
  }
  return w.take();
}

ModelCheckpoint deserialize_checkpoint(std::string_view bytes) {
  Reader r(bytes);
  if (bytes.size() < kMagic.size() || r.bytes(kMagic.size()) != kMagic) {
    throw FormatError("corrupt checkpoint: bad magic bytes");
  }
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw FormatError("checkpoint version " + std::to_string(version) + " is not supported (expected " +
                      std::to_string(kCheckpointVersion) + ")");
  }
  ModelCheckpoint cp;
  cp.kernel_size = static_cast<int>(r.u32());
  cp.patch_size = static_cast<int>(r.u32());
  const Index atoms = r.u32();
  if (cp.kernel_size < 1 || cp.patch_size < cp.kernel_size || cp.patch_size > 4096 || atoms < 1) {
    throw FormatError("corrupt checkpoint: invalid header dimensions");
  }
  const Index taps = static_cast<Index>(cp.kernel_size) * cp.kernel_size;
  const Index hr_dim = static_cast<Index>(cp.patch_size) * cp.patch_size;
  cp.theta.resize(taps);
  for (Index i = 0; i < taps; ++i) cp.theta(i) = r.f64();
  Eigen::MatrixXd d(hr_dim, atoms);
  for (Index row = 0; row < hr_dim; ++row) {
    for (Index c = 0; c < atoms; ++c) d(row, c) = r.f64();
  }
  // Stored atoms are already normalized; keep them bit-exact.
  cp.dictionary = Dictionary(Eigen::MatrixXd::Zero(hr_dim, atoms));
  for (Index c = 0; c < atoms; ++c) cp.dictionary.set_unit_atom(c, d.col(c));
  const std::uint32_t config_len = r.u32();
  cp.config = parse_train_config(r.bytes(config_len));
  const std::uint32_t trace_len = r.u32();
  cp.trace.reserve(trace_len);
  for (std::uint32_t i = 0; i < trace_len; ++i) {
    LossTerms t;
    t.hr_fidelity = r.f64();
    t.lr_fidelity = r.f64();
    t.sparsity = r.f64();
    cp.trace.push_back(t);
  }
  const std::uint32_t has_dense = r.u32();
  if (has_dense > 1) throw FormatError("corrupt checkpoint: bad dense-blur flag");
  if (has_dense == 1) {
    const Index rows = r.u32();
    const Index cols = r.u32();
    if (rows * cols * 8 > static_cast<Index>(bytes.size())) {
      throw FormatError("corrupt checkpoint: truncated file");
    }
    Eigen::MatrixXd b(rows, cols);
    for (Index row = 0; row < rows; ++row) {
      for (Index c = 0; c < cols; ++c) b(row, c) = r.f64();
    }
    cp.dense_blur = std::move(b);
  }
  if (!r.done()) throw FormatError("corrupt checkpoint: trailing bytes");
  if (cp.config.kernel_size != cp.kernel_size || cp.config.patch_size != cp.patch_size ||
      cp.config.atoms != atoms) {
    throw FormatError("corrupt checkpoint: config snapshot disagrees with header");
  }
  cp.validate();
  return cp;
}

void save_checkpoint(const ModelCheckpoint& checkpoint, const std::filesystem::path& path) {
  const std::string bytes = serialize_checkpoint(checkpoint);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

ModelCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint '" + path.string() + "'");
  const std::string bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return deserialize_checkpoint(bytes);
}

} // namespace dbdl
