#include "nlse/linear_solver.hpp"

#include <fftw3.h>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace nlse {

namespace {
// FFTW plan creation is not thread-safe; execution on private buffers is.
std::mutex& fftw_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct DirichletSolver::Impl {
  GridPtr grid;
  int dim = 1;
  bool box_like = false;
  std::array<int, 3> M{1, 1, 1};              // interior block extents
  std::array<std::vector<double>, 3> lam;     // per-axis stencil eigenvalues
  double norm = 1.0;                          // DST-I round-trip normalization

  // One DST-I plan per distinct axis length, executed on these buffers.
  std::map<int, fftw_plan> plans;
  double* buf_in = nullptr;
  double* buf_out = nullptr;
  int buf_len = 0;

  // Sparse fallback (staircase masks in dim >= 2).
  bool have_real_fac = false;
  double real_shift = 0.0;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> real_fac;
  bool have_cplx_fac = false;
  cplx cplx_shift{0.0, 0.0};
  Eigen::SparseLU<Eigen::SparseMatrix<cplx>> cplx_fac;

  ~Impl() {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    for (auto& [m, p] : plans) fftw_destroy_plan(p);
    if (buf_in) fftw_free(buf_in);
    if (buf_out) fftw_free(buf_out);
  }

  void init_eigenbasis() {
    norm = 1.0;
    int maxm = 0;
    for (int a = 0; a < dim; ++a) {
      M[a] = grid->block_hi[a] - grid->block_lo[a] + 1;
      maxm = std::max(maxm, M[a]);
      norm *= 2.0 * (M[a] + 1);
      lam[a].resize(M[a]);
      for (int k = 0; k < M[a]; ++k) {
        const double s = std::sin(0.5 * M_PI * (k + 1) / (M[a] + 1));
        lam[a][k] = 4.0 * s * s / (grid->dx[a] * grid->dx[a]);
      }
    }
    std::lock_guard<std::mutex> lock(fftw_mutex());
    buf_len = maxm;
    buf_in = static_cast<double*>(fftw_malloc(sizeof(double) * maxm));
    buf_out = static_cast<double*>(fftw_malloc(sizeof(double) * maxm));
    for (int a = 0; a < dim; ++a) {
      if (!plans.count(M[a])) {
        plans[M[a]] = fftw_plan_r2r_1d(M[a], buf_in, buf_out, FFTW_RODFT00, FFTW_ESTIMATE);
      }
    }
  }

  // In-place DST-I along one axis of the row-major block array.
  void dst_axis(std::vector<double>& data, int axis) {
    std::size_t stride = 1;
    for (int b = axis + 1; b < dim; ++b) stride *= M[b];
    std::size_t n_lines = 1;
    for (int b = 0; b < dim; ++b)
      if (b != axis) n_lines *= M[b];
    const int m = M[axis];
    const fftw_plan plan = plans.at(m);
    // Enumerate line base offsets: iterate the full index space with the axis
    // coordinate fixed to zero.
    std::array<int, 3> idx{0, 0, 0};
    for (std::size_t line = 0; line < n_lines; ++line) {
      std::size_t base = 0, s = 1;
      for (int b = dim - 1; b >= 0; --b) {
        base += static_cast<std::size_t>(idx[b]) * s;
        s *= M[b];
      }
      for (int j = 0; j < m; ++j) buf_in[j] = data[base + j * stride];
      fftw_execute_r2r(plan, buf_in, buf_out);
      for (int j = 0; j < m; ++j) data[base + j * stride] = buf_out[j];
      // Advance the transverse multi-index (axis coordinate stays zero).
      for (int b = dim - 1; b >= 0; --b) {
        if (b == axis) continue;
        if (++idx[b] < M[b]) break;
        idx[b] = 0;
      }
    }
  }

  void dst_all(std::vector<double>& data) {
    for (int a = 0; a < dim; ++a) dst_axis(data, a);
  }

  double total_lambda(std::size_t k) const {
    double v = 0.0;
    std::size_t rest = k;
    for (int a = dim - 1; a >= 0; --a) {
      v += lam[a][rest % M[a]];
      rest /= M[a];
    }
    return v;
  }

  Eigen::SparseMatrix<double> shifted_matrix_real(double c) const {
    const Grid& g = *grid;
    const auto n = static_cast<Eigen::Index>(g.n_interior());
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(g.n_interior() * (2 * dim + 1));
    for (std::size_t i = 0; i < g.n_interior(); ++i) {
      double diag = 1.0;
      for (int a = 0; a < dim; ++a) {
        const double w = c / (g.dx[a] * g.dx[a]);
        diag += 2.0 * w;
        for (int d = 0; d < 2; ++d) {
          const int32_t j = g.nbr[i][2 * a + d];
          if (j >= 0) trip.emplace_back(static_cast<int>(i), j, -w);
        }
      }
      trip.emplace_back(static_cast<int>(i), static_cast<int>(i), diag);
    }
    Eigen::SparseMatrix<double> A(n, n);
    A.setFromTriplets(trip.begin(), trip.end());
    return A;
  }

  Eigen::SparseMatrix<cplx> shifted_matrix_cplx(cplx c) const {
    const Grid& g = *grid;
    const auto n = static_cast<Eigen::Index>(g.n_interior());
    std::vector<Eigen::Triplet<cplx>> trip;
    trip.reserve(g.n_interior() * (2 * dim + 1));
    for (std::size_t i = 0; i < g.n_interior(); ++i) {
      cplx diag = 1.0;
      for (int a = 0; a < dim; ++a) {
        const cplx w = c / (g.dx[a] * g.dx[a]);
        diag += 2.0 * w;
        for (int d = 0; d < 2; ++d) {
          const int32_t j = g.nbr[i][2 * a + d];
          if (j >= 0) trip.emplace_back(static_cast<int>(i), j, -w);
        }
      }
      trip.emplace_back(static_cast<int>(i), static_cast<int>(i), diag);
    }
    Eigen::SparseMatrix<cplx> A(n, n);
    A.setFromTriplets(trip.begin(), trip.end());
    return A;
  }
};

DirichletSolver::DirichletSolver(GridPtr g) : impl_(std::make_unique<Impl>()) {
  impl_->grid = std::move(g);
  impl_->dim = impl_->grid->dim;
  impl_->box_like = impl_->grid->box_like;
  if (impl_->box_like) impl_->init_eigenbasis();
}

DirichletSolver::~DirichletSolver() = default;

bool DirichletSolver::has_eigenbasis() const { return impl_->box_like; }

const std::vector<double>& DirichletSolver::axis_eigenvalues(int axis) const {
  if (!impl_->box_like) throw std::logic_error("axis_eigenvalues: no eigenbasis on this grid");
  return impl_->lam[axis];
}

namespace {

// Thomas solve of (I + c (-laplacian_1d)) x = b on a contiguous interval.
template <typename S>
void thomas_shifted(const Grid& g, S c, const std::vector<S>& b, std::vector<S>& x) {
  const std::size_t n = b.size();
  const double inv2 = 1.0 / (g.dx[0] * g.dx[0]);
  const S w = c * inv2;
  const S diag = S(1.0) + 2.0 * w;
  static thread_local std::vector<S> cp, dp;
  cp.assign(n, S{});
  dp.assign(n, S{});
  S beta = diag;
  cp[0] = -w / beta;
  dp[0] = b[0] / beta;
  for (std::size_t i = 1; i < n; ++i) {
    beta = diag + w * cp[i - 1];
    cp[i] = -w / beta;
    dp[i] = (b[i] + w * dp[i - 1]) / beta;
  }
  x.resize(n);
  x[n - 1] = dp[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = dp[i] - cp[i] * x[i + 1];
}

}  // namespace

RealField DirichletSolver::solve_shifted(double c, const RealField& b) {
  detail::require_same_grid(b.grid, impl_->grid);
  if (c == 0.0) return b;
  RealField x(b.grid);
  if (impl_->dim == 1) {
    thomas_shifted<double>(*impl_->grid, c, b.v, x.v);
    return x;
  }
  if (impl_->box_like) {
    std::vector<double> data = b.v;
    impl_->dst_all(data);
    for (std::size_t k = 0; k < data.size(); ++k)
      data[k] /= (1.0 + c * impl_->total_lambda(k)) * impl_->norm;
    impl_->dst_all(data);
    x.v = std::move(data);
    return x;
  }
  if (!impl_->have_real_fac || impl_->real_shift != c) {
    auto A = impl_->shifted_matrix_real(c);
    impl_->real_fac.compute(A);
    if (impl_->real_fac.info() != Eigen::Success)
      throw std::runtime_error("sparse factorization failed (real shift)");
    impl_->have_real_fac = true;
    impl_->real_shift = c;
  }
  Eigen::Map<const Eigen::VectorXd> bv(b.v.data(), static_cast<Eigen::Index>(b.v.size()));
  Eigen::VectorXd xv = impl_->real_fac.solve(bv);
  x.v.assign(xv.data(), xv.data() + xv.size());
  return x;
}

ComplexField DirichletSolver::solve_shifted(cplx c, const ComplexField& b) {
  detail::require_same_grid(b.grid, impl_->grid);
  if (c == cplx{}) return b;
  ComplexField x(b.grid);
  if (impl_->dim == 1) {
    thomas_shifted<cplx>(*impl_->grid, c, b.v, x.v);
    return x;
  }
  if (impl_->box_like) {
    const std::size_t n = b.size();
    std::vector<double> re(n), im(n);
    for (std::size_t i = 0; i < n; ++i) {
      re[i] = b[i].real();
      im[i] = b[i].imag();
    }
    impl_->dst_all(re);
    impl_->dst_all(im);
    for (std::size_t k = 0; k < n; ++k) {
      const cplx z = cplx(re[k], im[k]) / ((1.0 + c * impl_->total_lambda(k)) * impl_->norm);
      re[k] = z.real();
      im[k] = z.imag();
    }
    impl_->dst_all(re);
    impl_->dst_all(im);
    for (std::size_t i = 0; i < n; ++i) x[i] = cplx(re[i], im[i]);
    return x;
  }
  if (!impl_->have_cplx_fac || impl_->cplx_shift != c) {
    auto A = impl_->shifted_matrix_cplx(c);
    impl_->cplx_fac.compute(A);
    if (impl_->cplx_fac.info() != Eigen::Success)
      throw std::runtime_error("sparse factorization failed (complex shift)");
    impl_->have_cplx_fac = true;
    impl_->cplx_shift = c;
  }
  using CVec = Eigen::Matrix<cplx, Eigen::Dynamic, 1>;
  Eigen::Map<const CVec> bv(b.v.data(), static_cast<Eigen::Index>(b.v.size()));
  CVec xv = impl_->cplx_fac.solve(bv);
  x.v.assign(xv.data(), xv.data() + xv.size());
  return x;
}

ComplexField DirichletSolver::propagate(double t, const ComplexField& psi) {
  detail::require_same_grid(psi.grid, impl_->grid);
  if (!impl_->box_like)
    throw std::logic_error("linear propagator requires a box-like interior (sine eigenbasis)");
  const std::size_t n = psi.size();
  std::vector<double> re(n), im(n);
  for (std::size_t i = 0; i < n; ++i) {
    re[i] = psi[i].real();
    im[i] = psi[i].imag();
  }
  impl_->dst_all(re);
  impl_->dst_all(im);
  for (std::size_t k = 0; k < n; ++k) {
    const double th = t * impl_->total_lambda(k);
    const cplx z = cplx(re[k], im[k]) * cplx(std::cos(th), -std::sin(th)) / impl_->norm;
    re[k] = z.real();
    im[k] = z.imag();
  }
  impl_->dst_all(re);
  impl_->dst_all(im);
  ComplexField out(psi.grid);
  for (std::size_t i = 0; i < n; ++i) out[i] = cplx(re[i], im[i]);
  return out;
}

}  // namespace nlse
