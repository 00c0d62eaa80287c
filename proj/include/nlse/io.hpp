// Grid/field dumps: CSV and a small binary format.
#pragma once

#include <string>

#include "nlse/field.hpp"

namespace nlse {

/// CSV dump of a real field: header "x[,y[,z]],value", one interior node per
/// row in lattice order (axis 0 slowest), 17 significant digits, '.' decimal.
void write_field_csv(const std::string& path, const RealField& f);

/// Binary dump.  16-byte header: magic "NLSEGRID" (8 bytes), uint16 format
/// version (1 = real payload, 2 = complex), uint16 dimension, uint32 nodes per
/// axis; then per axis the lo/hi bounding coordinates as doubles, a uint64
/// interior-node count, and the values in lattice order (one double per node,
/// or re/im pairs for complex).  Little-endian throughout.
void write_field_bin(const std::string& path, const RealField& f);
void write_field_bin(const std::string& path, const ComplexField& f);

/// Round-trip readers; the grid is rebuilt from the stored geometry and the
/// stated domain spec must reproduce the stored interior count.
RealField read_field_bin_real(const std::string& path, const DomainSpec& domain);
ComplexField read_field_bin_complex(const std::string& path, const DomainSpec& domain);

/// Format a double with 17 significant digits (locale-independent).
std::string fmt_g17(double x);

}  // namespace nlse
