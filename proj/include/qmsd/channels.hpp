#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qmsd/fock.hpp"

namespace qmsd {

// Completely positive trace-preserving map between truncated Fock spaces.
//
// Two storage forms share one type:
//  - general: an explicit list of dense Kraus operators;
//  - measure-and-prepare: every Kraus factor is rank one,
//    K_k = |prepared_k><measured_k|, stored as matched matrix columns.
// The factored form keeps grid-discretized POVM channels with thousands of
// outcomes tractable, and lets downstream integrals use per-outcome scalars
// instead of dense operator algebra.
struct KrausChannel {
  FockSpace in;
  FockSpace out;
  std::string label;
  std::vector<Matrix> kraus;  // general form; empty when factored
  Matrix prepared;            // out.dim() x k, unit columns (factored form)
  Matrix measured;            // in.dim() x k (factored form)

  bool factored() const { return kraus.empty(); }
  Eigen::Index n_kraus() const {
    return factored() ? measured.cols()
                      : static_cast<Eigen::Index>(kraus.size());
  }

  // rho -> sum_j K_j rho K_j^dag.
  Operator apply(const Operator& rho) const;

  // sum_j K_j^dag K_j on the input space (identity for an exact channel).
  Matrix completeness() const;

  // Largest singular value of (completeness - 1) restricted to total photon
  // number <= max_total. The unrestricted deviation is dominated by harmless
  // truncation at the top of the space.
  double completeness_deviation(int max_total = 10) const;
};

KrausChannel identity_channel(const FockSpace& space);

// Pure loss (transmittance eta in (0, 1]); loss_channel(1) is the identity.
KrausChannel loss_channel(double eta, const FockSpace& in);

// Quantum-limited amplifier of gain G >= 1. Output cutoff defaults to twice
// the input cutoff because amplification populates high Fock levels; the
// constructor refuses gains whose output leaks past that headroom.
KrausChannel amplifier_channel(double gain, const FockSpace& in,
                               std::optional<int> out_cutoff = std::nullopt);

struct HeterodyneOptions {
  double grid_step = 0.15;   // spacing of the square outcome grid
  double grid_radius = 6.0;  // grid covers [-radius, radius] on both axes
};

// Measure-and-prepare channel: project on the coherent-state POVM
// (1/pi)|beta><beta| d^2 beta over a finite grid, then re-prepare |g beta>.
KrausChannel heterodyne_mp_channel(double gain, const FockSpace& in,
                                   const FockSpace& out,
                                   const HeterodyneOptions& opts = {});

// Same measurement, but the re-prepared amplitude is conjugated: |g beta*>.
// Re-preparing the conjugate is completely positive, which is why the
// phase-conjugate branch is realized this way rather than as a transpose.
KrausChannel heterodyne_conjugate_mp_channel(
    double gain, const FockSpace& in, const FockSpace& out,
    const HeterodyneOptions& opts = {});

// Isometry splitting the input on a balanced beam splitter against vacuum:
// coherent inputs map as rho_alpha -> rho_{alpha/sqrt(2)} (x) rho_{alpha/sqrt(2)}.
KrausChannel half_bs_channel(const FockSpace& in);

// Channel output correlated with half of a two-mode squeezed vacuum of
// parameter lambda: J = (E (x) 1)(|psi_lambda><psi_lambda|), renormalized to
// unit trace. Layout: row index = i_out * ref_dim + i_ref.
struct ChoiState {
  Matrix j;
  FockSpace out_space;
  FockSpace ref_space;
  double lambda = 1.0;
  double tail_mass = 0.0;       // discarded two-mode-squeezed weight
  double trace_deviation = 0.0; // |tr J - 1| before renormalization
};

ChoiState choi_state(const KrausChannel& channel, double lambda);

}  // namespace qmsd
