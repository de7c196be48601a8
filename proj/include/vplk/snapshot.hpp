#pragma once

#include <stdexcept>
#include <string>

#include "vplk/grid.hpp"

namespace vplk {

class SnapshotError : public std::runtime_error {
 public:
  explicit SnapshotError(const std::string& what) : std::runtime_error(what) {}
};

// Grid and time metadata stored alongside a phase field. nx and nv are
// per-axis counts; the payload holds both components over dimx spatial axes.
struct SnapshotMeta {
  Formulation form = Formulation::sd;
  int dimx = 1;
  int nx = 0;
  int nv = 0;
  double lx = 0.0;
  double vcut = 0.0;
  double time = 0.0;
};

// Binary .vplk layout, little-endian: a 64-byte header
//   bytes  0..3   magic "VPLK"
//   bytes  4..7   u32 format version (1)
//   bytes  8..11  u32 formulation (0 = species, 1 = sum/difference)
//   bytes 12..15  u32 component count (2)
//   bytes 16..19  u32 dimx
//   bytes 20..23  u32 nx per axis
//   bytes 24..27  u32 nv per axis
//   bytes 28..31  u32 reserved (0)
//   bytes 32..39  f64 lx
//   bytes 40..47  f64 vcut
//   bytes 48..55  f64 time
//   bytes 56..63  f64 reserved (0)
// followed by both components as f64 arrays, spatial node major with the
// velocity index fastest.
void write_snapshot(const std::string& path, const SnapshotMeta& meta,
                    const PhaseField& f);

// Throws SnapshotError on a missing file, bad magic/version, or a payload
// whose size disagrees with the header.
PhaseField read_snapshot(const std::string& path, SnapshotMeta& meta);

}  // namespace vplk
