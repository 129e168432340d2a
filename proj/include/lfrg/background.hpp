#pragma once

#include <string>
#include <variant>

namespace lfrg {

// ---------------------------------------------------------------------------
// Renormalization-scale choice for the Hadamard subtraction
// ---------------------------------------------------------------------------

namespace mu {

struct Fixed {
  double mu2;
};
/// mu = k, removes the log(k^2/mu^2) terms of the vacuum flow.
struct TiedToK {};
/// mu^2 = 12 H^2, removes the log term of the de Sitter Wick square.
struct TiedToH {};

}  // namespace mu

using MuMode = std::variant<mu::Fixed, mu::TiedToK, mu::TiedToH>;

/// Throws DomainError for Fixed with mu2 <= 0.
void validate(const MuMode& mode);

/// mu^2 for the given scale k. H2 is only consulted by TiedToH; passing
/// H2 <= 0 with TiedToH (i.e. a flat background) is a DomainError.
double resolve_mu2(const MuMode& mode, double k, double H2 = 0.0);

std::string to_string(const MuMode& mode);

// ---------------------------------------------------------------------------
// Physical settings
// ---------------------------------------------------------------------------

struct MinkowskiVacuum {
  int d = 4;
  MuMode mu = mu::TiedToK{};
};

struct Thermal {
  double beta = 1.0;
  MuMode mu = mu::TiedToK{};  // for the vacuum part
};

struct DeSitter {
  double H2 = 1.0;
  double xi = 1.0 / 6.0;
  MuMode mu = mu::TiedToH{};
};

using Background = std::variant<MinkowskiVacuum, Thermal, DeSitter>;

/// Checks the per-variant invariants (even d >= 2, beta > 0, H2 > 0, valid MuMode).
void validate(const Background& bg);

std::string kind_name(const Background& bg);

}  // namespace lfrg
