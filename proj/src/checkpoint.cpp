#include "sgan/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace sgan {

namespace {

constexpr std::array<char, 8> kMagic{'S', 'G', 'A', 'N', 'C', 'K', 'P', 'T'};

template <typename T>
void put_le(std::ostream& out, T v) {
  static_assert(std::is_unsigned_v<T>);
  std::array<char, sizeof(T)> bytes{};
  for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(bytes.data(), bytes.size());
}

template <typename T>
T get_le(std::istream& in) {
  std::array<unsigned char, sizeof(T)> bytes{};
  if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) {
    throw CheckpointError("checkpoint: unexpected end of file");
  }
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(bytes[i]) << (8 * i);
  return v;
}

void put_f64(std::ostream& out, double v) { put_le(out, std::bit_cast<std::uint64_t>(v)); }
double get_f64(std::istream& in) { return std::bit_cast<double>(get_le<std::uint64_t>(in)); }

}  // namespace

const CheckpointEntry* Checkpoint::find(const std::string& name) const {
  for (const auto& e : entries) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_le<std::uint64_t>(out, ckpt.config_hash);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.entries.size()));
  for (const auto& e : ckpt.entries) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(e.name.size()));
    out.write(e.name.data(), static_cast<std::streamsize>(e.name.size()));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(e.dims.size()));
    for (std::uint32_t d : e.dims) put_le<std::uint32_t>(out, d);
    for (Index i = 0; i < e.value.size(); ++i) put_f64(out, e.value.data()[i]);
  }
  if (!out) throw CheckpointError("checkpoint: write failed");
}

Checkpoint read_checkpoint(std::istream& in) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) throw CheckpointError("checkpoint: bad magic");
  const auto version = get_le<std::uint32_t>(in);
  if (version != kCheckpointVersion) {
    throw CheckpointError("checkpoint: unsupported version " + std::to_string(version));
  }
  Checkpoint ckpt;
  ckpt.config_hash = get_le<std::uint64_t>(in);
  const auto count = get_le<std::uint32_t>(in);
  for (std::uint32_t k = 0; k < count; ++k) {
    CheckpointEntry e;
    const auto name_len = get_le<std::uint32_t>(in);
    if (name_len > 4096) throw CheckpointError("checkpoint: implausible name length");
    e.name.resize(name_len);
    if (!in.read(e.name.data(), name_len)) throw CheckpointError("checkpoint: unexpected end of file");
    const auto rank = get_le<std::uint32_t>(in);
    if (rank == 0 || rank > 2) throw CheckpointError("checkpoint: entry '" + e.name + "' has unsupported rank");
    std::uint64_t total = 1;
    for (std::uint32_t r = 0; r < rank; ++r) {
      e.dims.push_back(get_le<std::uint32_t>(in));
      total *= e.dims.back();
    }
    if (total > (std::uint64_t{1} << 31)) throw CheckpointError("checkpoint: entry '" + e.name + "' is too large");
    const Index rows = rank == 2 ? e.dims[0] : 1;
    const Index cols = rank == 2 ? e.dims[1] : e.dims[0];
    e.value.resize(rows, cols);
    for (Index i = 0; i < e.value.size(); ++i) e.value.data()[i] = get_f64(in);
    ckpt.entries.push_back(std::move(e));
  }
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("checkpoint: cannot open " + path.string() + " for writing");
  write_checkpoint(out, ckpt);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("checkpoint: cannot open " + path.string());
  return read_checkpoint(in);
}

namespace {

template <typename State>
auto slots(State& s) {
  using NetPtr = decltype(&s.nets.generator);
  struct Slot {
    const char* prefix;
    NetPtr net;
  };
  return std::array<Slot, 6>{{{"G", &s.nets.generator},
           {"I", &s.nets.inference},
           {"C", &s.nets.classifier},
           {"Dxy", &s.nets.critic_xy},
           {"Dxz", &s.nets.critic_xz},
           {"golden", &s.golden.network}}};
}

CheckpointEntry matrix_entry(std::string name, const Matrix& m) {
  return {std::move(name), {static_cast<std::uint32_t>(m.rows()), static_cast<std::uint32_t>(m.cols())}, m};
}

CheckpointEntry vector_entry(std::string name, std::initializer_list<Scalar> values) {
  Matrix m(1, static_cast<Index>(values.size()));
  Index i = 0;
  for (Scalar v : values) m(0, i++) = v;
  return {std::move(name), {static_cast<std::uint32_t>(m.cols())}, m};
}

const CheckpointEntry& require(const Checkpoint& ckpt, const std::string& name) {
  const CheckpointEntry* e = ckpt.find(name);
  if (!e) throw CheckpointError("checkpoint: missing entry '" + name + "'");
  return *e;
}

}  // namespace

Checkpoint make_checkpoint(const RunState& state, std::uint64_t config_hash) {
  Checkpoint ckpt;
  ckpt.config_hash = config_hash;
  for (const auto& slot : slots(state)) {
    for (const auto& nt : slot.net->params().tensors) {
      ckpt.entries.push_back(matrix_entry(std::string(slot.prefix) + "/" + nt.name, nt.tensor.value()));
    }
  }
  const GameLossReport& l = state.last.losses;
  ckpt.entries.push_back(vector_entry("golden/test_accuracy", {state.golden.test_accuracy}));
  ckpt.entries.push_back(vector_entry("meta/epoch", {static_cast<Scalar>(state.last.epoch)}));
  ckpt.entries.push_back(
      vector_entry("meta/losses", {l.l_xz_critic, l.l_xz_geninf, l.l_xy_critic, l.l_xy_gen, l.r_y, l.r_z}));
  return ckpt;
}

void restore_checkpoint(const Checkpoint& ckpt, RunState& state) {
  for (const auto& slot : slots(state)) {
    for (auto& nt : slot.net->params().tensors) {
      const std::string name = std::string(slot.prefix) + "/" + nt.name;
      const CheckpointEntry& e = require(ckpt, name);
      if (e.value.rows() != nt.tensor.rows() || e.value.cols() != nt.tensor.cols()) {
        throw CheckpointError("checkpoint: entry '" + name + "' has shape " +
                              shape_string({e.value.rows(), e.value.cols()}) + ", network expects " +
                              shape_string(nt.tensor.shape()));
      }
      nt.tensor.mutable_value() = e.value;
    }
  }
  state.golden.test_accuracy = require(ckpt, "golden/test_accuracy").value(0, 0);
  state.last.epoch = static_cast<int>(require(ckpt, "meta/epoch").value(0, 0));
  const Matrix& l = require(ckpt, "meta/losses").value;
  if (l.size() != 6) throw CheckpointError("checkpoint: meta/losses must hold 6 values");
  state.last.losses = {state.last.epoch, l(0, 0), l(0, 1), l(0, 2), l(0, 3), l(0, 4), l(0, 5)};
}

}  // namespace sgan
