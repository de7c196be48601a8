#include "vplk/snapshot.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace vplk {

namespace {

constexpr char kMagic[4] = {'V', 'P', 'L', 'K'};
constexpr std::uint32_t kVersion = 1;

std::size_t axis_pow(int per_axis, int dims) {
  std::size_t s = 1;
  for (int k = 0; k < dims; ++k) s *= static_cast<std::size_t>(per_axis);
  return s;
}

}  // namespace

void write_snapshot(const std::string& path, const SnapshotMeta& meta,
                    const PhaseField& f) {
  const std::size_t nxtot = axis_pow(meta.nx, meta.dimx);
  const std::size_t nvtot = axis_pow(meta.nv, 3);
  if (f.nx != nxtot || f.nv != nvtot)
    throw SnapshotError("write_snapshot: field dimensions disagree with metadata");

  unsigned char head[64] = {0};
  std::memcpy(head, kMagic, 4);
  const std::uint32_t u32s[5] = {kVersion, static_cast<std::uint32_t>(meta.form), 2u,
                                 static_cast<std::uint32_t>(meta.dimx),
                                 static_cast<std::uint32_t>(meta.nx)};
  std::memcpy(head + 4, u32s, sizeof u32s);
  const std::uint32_t nv32 = static_cast<std::uint32_t>(meta.nv);
  std::memcpy(head + 24, &nv32, 4);
  const double f64s[3] = {meta.lx, meta.vcut, meta.time};
  std::memcpy(head + 32, f64s, sizeof f64s);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw SnapshotError("write_snapshot: cannot open " + path);
  out.write(reinterpret_cast<const char*>(head), sizeof head);
  for (int c = 0; c < 2; ++c)
    out.write(reinterpret_cast<const char*>(f.comp[c].data()),
              static_cast<std::streamsize>(f.comp[c].size() * sizeof(double)));
  if (!out) throw SnapshotError("write_snapshot: short write to " + path);
}

PhaseField read_snapshot(const std::string& path, SnapshotMeta& meta) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SnapshotError("read_snapshot: cannot open " + path);

  unsigned char head[64];
  in.read(reinterpret_cast<char*>(head), sizeof head);
  if (!in || std::memcmp(head, kMagic, 4) != 0)
    throw SnapshotError("read_snapshot: " + path + " is not a .vplk snapshot");

  std::uint32_t version, form, comps, dimx, nx, nv;
  std::memcpy(&version, head + 4, 4);
  std::memcpy(&form, head + 8, 4);
  std::memcpy(&comps, head + 12, 4);
  std::memcpy(&dimx, head + 16, 4);
  std::memcpy(&nx, head + 20, 4);
  std::memcpy(&nv, head + 24, 4);
  if (version != kVersion)
    throw SnapshotError("read_snapshot: unsupported format version " +
                        std::to_string(version));
  if (form > 1 || comps != 2 || dimx < 1 || dimx > 3 || nx == 0 || nv == 0 ||
      nx > (1u << 16) || nv > (1u << 16))
    throw SnapshotError("read_snapshot: corrupt header in " + path);

  double f64s[3];
  std::memcpy(f64s, head + 32, sizeof f64s);
  meta.form = static_cast<Formulation>(form);
  meta.dimx = static_cast<int>(dimx);
  meta.nx = static_cast<int>(nx);
  meta.nv = static_cast<int>(nv);
  meta.lx = f64s[0];
  meta.vcut = f64s[1];
  meta.time = f64s[2];
  if (!(std::isfinite(meta.lx) && meta.lx > 0.0 && std::isfinite(meta.vcut) &&
        meta.vcut > 0.0 && std::isfinite(meta.time)))
    throw SnapshotError("read_snapshot: corrupt header in " + path);

  const std::size_t nxtot = axis_pow(meta.nx, meta.dimx);
  const std::size_t nvtot = axis_pow(meta.nv, 3);
  PhaseField f;
  f.resize(meta.form, nxtot, nvtot);
  for (int c = 0; c < 2; ++c) {
    in.read(reinterpret_cast<char*>(f.comp[c].data()),
            static_cast<std::streamsize>(nxtot * nvtot * sizeof(double)));
    if (!in) throw SnapshotError("read_snapshot: truncated payload in " + path);
  }
  char extra;
  if (in.read(&extra, 1))
    throw SnapshotError("read_snapshot: trailing bytes in " + path);
  return f;
}

}  // namespace vplk
