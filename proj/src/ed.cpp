#include "latticevar/ed.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "lanczos.hpp"
#include "latticevar/error.hpp"

namespace latticevar::ed {

FockBasis::FockBasis(const LatticeSpec& lattice, std::size_t cap) : lattice_(lattice) {
  validate(lattice);
  radix_ = static_cast<std::size_t>(lattice.n_max) + 1;
  strides_.resize(lattice.sites);
  long double dim = 1.0L;
  std::size_t stride = 1;
  for (int j = 0; j < lattice.sites; ++j) {
    strides_[j] = stride;
    dim *= static_cast<long double>(radix_);
    if (dim > static_cast<long double>(cap)) {
      throw Error(ErrorCode::dimension_overflow,
                  "Fock dimension (" + std::to_string(radix_) + ")^" +
                      std::to_string(lattice.sites) + " exceeds cap " + std::to_string(cap));
    }
    stride *= radix_;
  }
  dimension_ = stride;
}

std::vector<int> FockBasis::occupations(std::size_t index) const {
  std::vector<int> occ(lattice_.sites);
  for (int j = 0; j < lattice_.sites; ++j) {
    occ[j] = static_cast<int>(index % radix_);
    index /= radix_;
  }
  return occ;
}

std::size_t FockBasis::index(const std::vector<int>& occupations) const {
  if (static_cast<int>(occupations.size()) != lattice_.sites) {
    throw Error(ErrorCode::invalid_argument, "occupation vector has wrong length");
  }
  std::size_t idx = 0;
  for (int j = 0; j < lattice_.sites; ++j) {
    if (occupations[j] < 0 || occupations[j] > lattice_.n_max) {
      throw Error(ErrorCode::invalid_argument, "occupation outside truncation");
    }
    idx += static_cast<std::size_t>(occupations[j]) * strides_[j];
  }
  return idx;
}

int FockBasis::total_particles(std::size_t index) const {
  int total = 0;
  for (int j = 0; j < lattice_.sites; ++j) {
    total += static_cast<int>(index % radix_);
    index /= radix_;
  }
  return total;
}

SparseMatrix build_hamiltonian(const ModelParams& params, const FockBasis& basis) {
  require_solvable(params);
  const int sites = basis.sites();
  const int n_max = basis.n_max();
  const std::size_t dim = basis.dimension();

  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(dim * static_cast<std::size_t>(1 + 2 * sites + 2 * sites));
  std::vector<int> occ(sites);
  for (std::size_t col = 0; col < dim; ++col) {
    for (int j = 0; j < sites; ++j) occ[j] = basis.occupation(col, j);
    const auto c = static_cast<Eigen::Index>(col);

    double diag = 0.0;
    for (int j = 0; j < sites; ++j) {
      const double n = occ[j];
      const double m = occ[(j + 1) % sites];
      diag += -params.mu * n + 0.5 * params.u * n * (n - 1.0) + params.v * n * m;
    }
    if (diag != 0.0) entries.emplace_back(c, c, diag);

    if (params.j != 0.0) {
      for (int j = 0; j < sites; ++j) {
        const int k = (j + 1) % sites;
        // a_j^dag a_k and a_k^dag a_j
        if (occ[k] > 0 && occ[j] < n_max) {
          const auto row = static_cast<Eigen::Index>(col + basis.stride(j) - basis.stride(k));
          entries.emplace_back(row, c, -params.j * std::sqrt((occ[j] + 1.0) * occ[k]));
        }
        if (occ[j] > 0 && occ[k] < n_max) {
          const auto row = static_cast<Eigen::Index>(col + basis.stride(k) - basis.stride(j));
          entries.emplace_back(row, c, -params.j * std::sqrt((occ[k] + 1.0) * occ[j]));
        }
      }
    }

    if (params.eps != 0.0) {
      for (int j = 0; j < sites; ++j) {
        const double n = occ[j];
        if (occ[j] + 2 <= n_max) {
          const auto row = static_cast<Eigen::Index>(col + 2 * basis.stride(j));
          entries.emplace_back(row, c, -0.5 * params.eps * std::sqrt((n + 1.0) * (n + 2.0)));
        }
        if (occ[j] >= 2) {
          const auto row = static_cast<Eigen::Index>(col - 2 * basis.stride(j));
          entries.emplace_back(row, c, -0.5 * params.eps * std::sqrt(n * (n - 1.0)));
        }
      }
    }
  }
  const auto n = static_cast<Eigen::Index>(dim);
  SparseMatrix h(n, n);
  h.setFromTriplets(entries.begin(), entries.end());
  h.makeCompressed();
  return h;
}

namespace {

struct SectorResult {
  double energy = std::numeric_limits<double>::infinity();
  Eigen::VectorXd vector;
  double residual = 0.0;
  bool present = false;
};

SectorResult solve_sector(const SparseMatrix& h, const std::vector<std::size_t>& states,
                          const std::vector<Eigen::Index>& local, const SolverOptions& options) {
  SectorResult out;
  const auto size = static_cast<Eigen::Index>(states.size());
  if (size == 0) return out;
  out.present = true;

  std::vector<Eigen::Triplet<double>> entries;
  for (Eigen::Index r = 0; r < size; ++r) {
    const auto global = static_cast<Eigen::Index>(states[r]);
    for (SparseMatrix::InnerIterator it(h, global); it; ++it) {
      const Eigen::Index c = local[it.col()];
      if (c >= 0) entries.emplace_back(r, c, it.value());
    }
  }
  SparseMatrix block(size, size);
  block.setFromTriplets(entries.begin(), entries.end());

  if (static_cast<std::size_t>(size) < options.dense_threshold) {
    const Eigen::MatrixXd dense(block);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense);
    if (solver.info() != Eigen::Success) {
      throw Error(ErrorCode::no_convergence, "dense eigensolver failed");
    }
    out.energy = solver.eigenvalues()(0);
    out.vector = solver.eigenvectors().col(0);
  } else {
    // Fixed, dense start vector so results are reproducible.
    Eigen::VectorXd start(size);
    for (Eigen::Index i = 0; i < size; ++i) {
      start(i) = 1.0 + 0.5 * std::sin(0.7 * static_cast<double>(i) + 0.3);
    }
    auto pair = detail::lowest_eigenpair(block, start, options.tol, options.krylov_dim,
                                         options.max_restarts);
    out.energy = pair.value;
    out.vector = std::move(pair.vector);
  }
  out.vector.normalize();
  out.residual = (block * out.vector - out.energy * out.vector).norm();
  return out;
}

}  // namespace

EDGroundState ground_state(const SparseMatrix& hamiltonian, const FockBasis& basis,
                           const SolverOptions& options) {
  const std::size_t dim = basis.dimension();
  if (static_cast<std::size_t>(hamiltonian.rows()) != dim ||
      static_cast<std::size_t>(hamiltonian.cols()) != dim) {
    throw Error(ErrorCode::invalid_argument, "Hamiltonian does not match basis dimension");
  }
  std::vector<std::size_t> even, odd;
  std::vector<Eigen::Index> local_even(dim, -1), local_odd(dim, -1);
  for (std::size_t i = 0; i < dim; ++i) {
    if (basis.parity(i) > 0) {
      local_even[i] = static_cast<Eigen::Index>(even.size());
      even.push_back(i);
    } else {
      local_odd[i] = static_cast<Eigen::Index>(odd.size());
      odd.push_back(i);
    }
  }
  const SectorResult e = solve_sector(hamiltonian, even, local_even, options);
  const SectorResult o = solve_sector(hamiltonian, odd, local_odd, options);

  EDGroundState out;
  out.lattice = basis.lattice();
  out.coefficients = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
  const bool tie = o.present && std::abs(e.energy - o.energy) < 1e-12;
  const bool take_odd = o.present && !tie && o.energy < e.energy;
  const SectorResult& chosen = take_odd ? o : e;
  const auto& states = take_odd ? odd : even;
  for (std::size_t r = 0; r < states.size(); ++r) {
    out.coefficients(static_cast<Eigen::Index>(states[r])) =
        chosen.vector(static_cast<Eigen::Index>(r));
  }
  // Fix the overall sign so the largest component is positive.
  Eigen::Index arg = 0;
  out.coefficients.cwiseAbs().maxCoeff(&arg);
  if (out.coefficients(arg) < 0) out.coefficients = -out.coefficients;
  out.energy = chosen.energy;
  out.parity = take_odd ? -1 : 1;
  out.degenerate = tie;
  out.residual = chosen.residual;
  return out;
}

EDGroundState solve(const ModelParams& params, const LatticeSpec& lattice,
                    const SolverOptions& options) {
  const FockBasis basis(lattice);
  return ground_state(build_hamiltonian(params, basis), basis, options);
}

EDGroundState solve_converged(const ModelParams& params, LatticeSpec lattice, double energy_tol,
                              int step, int n_max_limit, const SolverOptions& options) {
  if (step < 1) throw Error(ErrorCode::invalid_argument, "truncation step must be positive");
  EDGroundState previous = solve(params, lattice, options);
  while (lattice.n_max + step <= n_max_limit) {
    lattice.n_max += step;
    EDGroundState next = solve(params, lattice, options);
    const bool done = std::abs(next.energy - previous.energy) < energy_tol;
    previous = std::move(next);
    if (done) return previous;
  }
  throw Error(ErrorCode::no_convergence, "ED energy did not converge in the truncation");
}

Observables observables(const EDGroundState& state) {
  const FockBasis basis(state.lattice);
  const int sites = basis.sites();
  const std::size_t dim = basis.dimension();
  const Eigen::VectorXd& c = state.coefficients;
  if (static_cast<std::size_t>(c.size()) != dim) {
    throw Error(ErrorCode::invalid_argument, "state does not match its lattice");
  }
  const int half = sites / 2;
  Observables obs;
  obs.density.assign(sites, 0.0);
  obs.amplitude.assign(sites, 0.0);
  obs.pair.assign(sites, 0.0);
  obs.c_sf.assign(half + 1, 0.0);
  obs.c_dw.assign(half + 1, 0.0);

  std::vector<double> nn(half + 1, 0.0);
  std::vector<int> occ(sites);
  for (std::size_t i = 0; i < dim; ++i) {
    const double ci = c(static_cast<Eigen::Index>(i));
    if (ci == 0.0) continue;
    for (int j = 0; j < sites; ++j) occ[j] = basis.occupation(i, j);
    const double w = ci * ci;
    double phi = 0.0;
    for (int j = 0; j < sites; ++j) {
      obs.density[j] += w * occ[j];
      phi += (j % 2 == 0 ? 1.0 : -1.0) * occ[j];
      for (int d = 0; d <= half; ++d) nn[d] += w * occ[j] * occ[(j + d) % sites];
      if (occ[j] >= 1) {
        // <i - e_j| a_j |i>
        obs.amplitude[j] += c(static_cast<Eigen::Index>(i - basis.stride(j))) * ci *
                            std::sqrt(static_cast<double>(occ[j]));
      }
      if (occ[j] >= 2) {
        obs.pair[j] += c(static_cast<Eigen::Index>(i - 2 * basis.stride(j))) * ci *
                       std::sqrt(static_cast<double>(occ[j]) * (occ[j] - 1));
      }
      obs.c_sf[0] += w * occ[j];
      for (int d = 1; d <= half; ++d) {
        const int k = (j + d) % sites;
        if (occ[k] >= 1 && occ[j] < basis.n_max()) {
          // a_j^dag a_k |i>
          const std::size_t target = i + basis.stride(j) - basis.stride(k);
          obs.c_sf[d] += c(static_cast<Eigen::Index>(target)) * ci *
                         std::sqrt((occ[j] + 1.0) * occ[k]);
        }
      }
    }
    obs.phi2 += w * phi * phi;
    obs.phi4 += w * phi * phi * phi * phi;
  }
  double mean = 0.0;
  for (double n : obs.density) mean += n;
  mean /= sites;
  for (int d = 0; d <= half; ++d) {
    obs.c_sf[d] /= sites;
    // (1/L) sum_j <n_j n_{j+d}> - 2 mean <n> + mean^2 with translation-averaged density
    obs.c_dw[d] = nn[d] / sites - mean * mean;
  }
  return obs;
}

}  // namespace latticevar::ed
