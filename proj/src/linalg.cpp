#include "lorma/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace lorma {

namespace {

constexpr double kJacobiTol = 1e-12;  // relative off-diagonal Gram threshold
constexpr int kJacobiMaxSweeps = 60;
constexpr int kQrMaxIters = 60;  // per deflation block, exceptional shifts every 10

double sign_with(double magnitude, double sign_source) {
    return sign_source >= 0.0 ? std::abs(magnitude) : -std::abs(magnitude);
}

/// Jacobi SVD core for rows >= cols. Returns {u, sigma, v} with v (not vt).
void jacobi_svd_tall(const Matrix& input, Matrix& u, std::vector<double>& sigma,
                     Matrix& v) {
    const std::size_t n = input.rows(), p = input.cols();
    Matrix a = input;
    v = Matrix::identity(p);

    auto column_dot = [&](const Matrix& m, std::size_t ci, std::size_t cj) {
        double acc = 0.0;
        for (std::size_t row = 0; row < m.rows(); ++row) acc += m(row, ci) * m(row, cj);
        return acc;
    };

    // Columns that collapse below the noise floor of the input are
    // numerically null; rotating them against each other never satisfies the
    // relative test and would cycle forever on rank-deficient input.
    const double noise_floor = std::numeric_limits<double>::epsilon() *
                               input.frobenius_norm();
    const double noise_floor_sq = noise_floor * noise_floor;

    bool converged = false;
    for (int sweep = 0; sweep < kJacobiMaxSweeps && !converged; ++sweep) {
        converged = true;
        for (std::size_t i = 0; i + 1 < p; ++i) {
            for (std::size_t j = i + 1; j < p; ++j) {
                const double alpha = column_dot(a, i, i);
                const double beta = column_dot(a, j, j);
                if (alpha <= noise_floor_sq || beta <= noise_floor_sq) continue;
                const double gamma = column_dot(a, i, j);
                if (std::abs(gamma) <= kJacobiTol * std::sqrt(alpha * beta)) continue;
                converged = false;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t =
                    sign_with(1.0, zeta) /
                    (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (std::size_t row = 0; row < n; ++row) {
                    const double ai = a(row, i), aj = a(row, j);
                    a(row, i) = c * ai - s * aj;
                    a(row, j) = s * ai + c * aj;
                }
                for (std::size_t row = 0; row < p; ++row) {
                    const double vi = v(row, i), vj = v(row, j);
                    v(row, i) = c * vi - s * vj;
                    v(row, j) = s * vi + c * vj;
                }
            }
        }
    }
    if (!converged) {
        throw NumericalError("svd: one-sided Jacobi did not converge in " +
                             std::to_string(kJacobiMaxSweeps) + " sweeps");
    }

    sigma.assign(p, 0.0);
    for (std::size_t j = 0; j < p; ++j) sigma[j] = std::sqrt(column_dot(a, j, j));

    // Sort singular values descending, permuting the columns of a and v.
    std::vector<std::size_t> order(p);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });
    Matrix a_sorted(n, p), v_sorted(p, p);
    std::vector<double> sigma_sorted(p);
    for (std::size_t j = 0; j < p; ++j) {
        sigma_sorted[j] = sigma[order[j]];
        for (std::size_t row = 0; row < n; ++row) a_sorted(row, j) = a(row, order[j]);
        for (std::size_t row = 0; row < p; ++row) v_sorted(row, j) = v(row, order[j]);
    }
    sigma = std::move(sigma_sorted);
    v = std::move(v_sorted);

    // Columns with negligible norm cannot be normalized; replace them with an
    // orthonormal completion against the accepted columns.
    const double smax = sigma.empty() ? 0.0 : sigma[0];
    const double tiny =
        smax * static_cast<double>(std::max(n, p)) * std::numeric_limits<double>::epsilon();
    u = Matrix(n, p);
    std::size_t kept = 0;
    for (std::size_t j = 0; j < p; ++j) {
        if (sigma[j] > tiny && sigma[j] > 0.0) {
            for (std::size_t row = 0; row < n; ++row)
                u(row, j) = a_sorted(row, j) / sigma[j];
            kept = j + 1;
        }
    }
    if (kept < p) {
        // Greedy completion: keep the residual of every standard basis vector
        // against the accepted columns and repeatedly promote the largest one
        // (a one-pass candidate scan can run out on heavily deficient input).
        std::vector<std::vector<double>> residuals(n, std::vector<double>(n, 0.0));
        for (std::size_t cand = 0; cand < n; ++cand) {
            residuals[cand][cand] = 1.0;
            for (std::size_t jj = 0; jj < kept; ++jj) {
                const double dot = u(cand, jj);  // <e_cand, u_jj>
                for (std::size_t row = 0; row < n; ++row)
                    residuals[cand][row] -= dot * u(row, jj);
            }
        }
        for (std::size_t j = kept; j < p; ++j) {
            std::size_t best = 0;
            double best_norm2 = -1.0;
            for (std::size_t cand = 0; cand < n; ++cand) {
                double norm2 = 0.0;
                for (double x : residuals[cand]) norm2 += x * x;
                if (norm2 > best_norm2) {
                    best_norm2 = norm2;
                    best = cand;
                }
            }
            std::vector<double> column = residuals[best];
            // One re-orthogonalization pass keeps the completion orthonormal
            // even when the chosen residual is far from unit length.
            for (std::size_t jj = 0; jj < j; ++jj) {
                double dot = 0.0;
                for (std::size_t row = 0; row < n; ++row) dot += column[row] * u(row, jj);
                for (std::size_t row = 0; row < n; ++row) column[row] -= dot * u(row, jj);
            }
            double norm2 = 0.0;
            for (double x : column) norm2 += x * x;
            const double norm = std::sqrt(norm2);
            for (std::size_t row = 0; row < n; ++row) u(row, j) = column[row] / norm;
            for (auto& residual : residuals) {  // deflate all candidates
                double dot = 0.0;
                for (std::size_t row = 0; row < n; ++row) dot += residual[row] * u(row, j);
                for (std::size_t row = 0; row < n; ++row) residual[row] -= dot * u(row, j);
            }
        }
    }
}

/// Householder reduction of a square matrix to upper Hessenberg form.
void hessenberg_reduce(Matrix& h) {
    const std::size_t n = h.rows();
    if (n < 3) return;
    for (std::size_t m = 1; m + 1 < n; ++m) {
        double scale = 0.0;
        for (std::size_t i = m; i < n; ++i) scale += std::abs(h(i, m - 1));
        if (scale == 0.0) continue;

        std::vector<double> w(n, 0.0);
        double norm2 = 0.0;
        for (std::size_t i = m; i < n; ++i) {
            w[i] = h(i, m - 1) / scale;
            norm2 += w[i] * w[i];
        }
        double g = -sign_with(std::sqrt(norm2), w[m]);
        const double hcoef = norm2 - w[m] * g;  // = v'v / 2 with v = w - g*e_m
        w[m] -= g;
        if (hcoef == 0.0) continue;

        // Apply P = I - w w^T / hcoef from the left, then from the right.
        for (std::size_t j = m - 1; j < n; ++j) {
            double f = 0.0;
            for (std::size_t i = m; i < n; ++i) f += w[i] * h(i, j);
            f /= hcoef;
            for (std::size_t i = m; i < n; ++i) h(i, j) -= f * w[i];
        }
        for (std::size_t i = 0; i < n; ++i) {
            double f = 0.0;
            for (std::size_t j = m; j < n; ++j) f += w[j] * h(i, j);
            f /= hcoef;
            for (std::size_t j = m; j < n; ++j) h(i, j) -= f * w[j];
        }
        h(m, m - 1) = scale * g;
        for (std::size_t i = m + 1; i < n; ++i) h(i, m - 1) = 0.0;
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix; eigenvalues only.
std::vector<std::complex<double>> hessenberg_qr_eigenvalues(Matrix h) {
    const int n = static_cast<int>(h.rows());
    std::vector<std::complex<double>> eig;
    eig.reserve(n);
    const double eps = std::numeric_limits<double>::epsilon();

    double anorm = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = std::max(i - 1, 0); j < n; ++j) anorm += std::abs(h(i, j));
    if (anorm == 0.0) {  // zero matrix
        eig.assign(n, {0.0, 0.0});
        return eig;
    }

    int nn = n - 1;
    double t = 0.0;
    while (nn >= 0) {
        int its = 0;
        int l;
        for (;;) {
            // Look for a negligible subdiagonal entry to split at.
            for (l = nn; l >= 1; --l) {
                double s = std::abs(h(l - 1, l - 1)) + std::abs(h(l, l));
                if (s == 0.0) s = anorm;
                if (std::abs(h(l, l - 1)) <= eps * s) {
                    h(l, l - 1) = 0.0;
                    break;
                }
            }
            if (l < 0) l = 0;
            double x = h(nn, nn);
            if (l == nn) {  // one real root
                eig.emplace_back(x + t, 0.0);
                --nn;
                break;
            }
            double y = h(nn - 1, nn - 1);
            double w = h(nn, nn - 1) * h(nn - 1, nn);
            if (l == nn - 1) {  // a 2x2 block: two roots
                double p = 0.5 * (y - x);
                double q = p * p + w;
                double z = std::sqrt(std::abs(q));
                x += t;
                if (q >= 0.0) {  // real pair
                    z = p + sign_with(z, p);
                    eig.emplace_back(x + z, 0.0);
                    eig.emplace_back(z != 0.0 ? x - w / z : x + z, 0.0);
                } else {  // complex conjugate pair
                    eig.emplace_back(x + p, z);
                    eig.emplace_back(x + p, -z);
                }
                nn -= 2;
                break;
            }
            // No root isolated yet: perform one double-shift QR step.
            if (its == kQrMaxIters) {
                throw NumericalError(
                    "eigenvalues: QR iteration cap exceeded on a block of size " +
                    std::to_string(nn - l + 1));
            }
            if (its != 0 && its % 10 == 0) {  // exceptional shift
                t += x;
                for (int i = 0; i <= nn; ++i) h(i, i) -= x;
                double s = std::abs(h(nn, nn - 1)) + std::abs(h(nn - 1, nn - 2));
                y = x = 0.75 * s;
                w = -0.4375 * s * s;
            }
            ++its;

            int m;
            double p = 0.0, q = 0.0, r = 0.0, z = 0.0;
            for (m = nn - 2; m >= l; --m) {
                z = h(m, m);
                double rr = x - z;
                double ss = y - z;
                p = (rr * ss - w) / h(m + 1, m) + h(m, m + 1);
                q = h(m + 1, m + 1) - z - rr - ss;
                r = h(m + 2, m + 1);
                double scale = std::abs(p) + std::abs(q) + std::abs(r);
                p /= scale;
                q /= scale;
                r /= scale;
                if (m == l) break;
                const double u = std::abs(h(m, m - 1)) * (std::abs(q) + std::abs(r));
                const double v = std::abs(p) * (std::abs(h(m - 1, m - 1)) +
                                                std::abs(z) + std::abs(h(m + 1, m + 1)));
                if (u <= eps * v) break;
            }
            for (int i = m + 2; i <= nn; ++i) {
                h(i, i - 2) = 0.0;
                if (i != m + 2) h(i, i - 3) = 0.0;
            }
            for (int k = m; k <= nn - 1; ++k) {
                if (k != m) {
                    p = h(k, k - 1);
                    q = h(k + 1, k - 1);
                    r = (k != nn - 1) ? h(k + 2, k - 1) : 0.0;
                    x = std::abs(p) + std::abs(q) + std::abs(r);
                    if (x != 0.0) {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                double s = sign_with(std::sqrt(p * p + q * q + r * r), p);
                if (s == 0.0) continue;
                if (k == m) {
                    if (l != m) h(k, k - 1) = -h(k, k - 1);
                } else {
                    h(k, k - 1) = -s * x;
                }
                p += s;
                x = p / s;
                y = q / s;
                z = r / s;
                q /= p;
                r /= p;
                for (int j = k; j <= nn; ++j) {  // row modification
                    double pp = h(k, j) + q * h(k + 1, j);
                    if (k != nn - 1) {
                        pp += r * h(k + 2, j);
                        h(k + 2, j) -= pp * z;
                    }
                    h(k + 1, j) -= pp * y;
                    h(k, j) -= pp * x;
                }
                const int mmin = std::min(nn, k + 3);
                for (int i = l; i <= mmin; ++i) {  // column modification
                    double pp = x * h(i, k) + y * h(i, k + 1);
                    if (k != nn - 1) {
                        pp += z * h(i, k + 2);
                        h(i, k + 2) -= pp * r;
                    }
                    h(i, k + 1) -= pp * q;
                    h(i, k) -= pp;
                }
            }
        }
    }
    return eig;
}

}  // namespace

Matrix SvdResult::reconstruct() const {
    Matrix scaled = u;
    for (std::size_t i = 0; i < scaled.rows(); ++i)
        for (std::size_t j = 0; j < scaled.cols(); ++j) scaled(i, j) *= sigma[j];
    return matmul(scaled, vt);
}

SvdResult svd(const Matrix& m) {
    if (m.empty()) throw ShapeError("svd: empty matrix");
    SvdResult out;
    if (m.rows() >= m.cols()) {
        Matrix v;
        jacobi_svd_tall(m, out.u, out.sigma, v);
        out.vt = v.transposed();
    } else {
        // svd(m^T) = u s v^T  =>  m = v s u^T
        Matrix u_t, v_t;
        std::vector<double> sigma;
        jacobi_svd_tall(m.transposed(), u_t, sigma, v_t);
        out.u = std::move(v_t);
        out.sigma = std::move(sigma);
        out.vt = u_t.transposed();
    }
    return out;
}

int numerical_rank(const SvdResult& s, std::size_t rows, std::size_t cols) {
    if (s.sigma.empty()) return 0;
    const double tol = static_cast<double>(std::max(rows, cols)) *
                       std::numeric_limits<double>::epsilon() * s.sigma[0];
    int rank = 0;
    for (double sv : s.sigma)
        if (sv > tol) ++rank;
    return rank;
}

int numerical_rank(const Matrix& m) {
    return numerical_rank(svd(m), m.rows(), m.cols());
}

Matrix pseudo_inverse(const Matrix& m) {
    const SvdResult s = svd(m);
    const double tol = static_cast<double>(std::max(m.rows(), m.cols())) *
                       std::numeric_limits<double>::epsilon() *
                       (s.sigma.empty() ? 0.0 : s.sigma[0]);
    // V * pinv(Sigma) * U^T
    Matrix v = s.vt.transposed();
    for (std::size_t i = 0; i < v.rows(); ++i)
        for (std::size_t j = 0; j < v.cols(); ++j)
            v(i, j) = s.sigma[j] > tol ? v(i, j) / s.sigma[j] : 0.0;
    return matmul(v, s.u.transposed());
}

Matrix left_pseudo_inverse(const Matrix& m0) {
    if (m0.rows() < m0.cols()) {
        throw ShapeError("left_pseudo_inverse: need rows >= cols, got " +
                         std::to_string(m0.rows()) + "x" + std::to_string(m0.cols()));
    }
    const SvdResult s = svd(m0);
    const int rank = numerical_rank(s, m0.rows(), m0.cols());
    if (rank != static_cast<int>(m0.cols())) {
        throw RankError("left_pseudo_inverse: matrix is rank-deficient, observed rank " +
                            std::to_string(rank) + " of " + std::to_string(m0.cols()),
                        rank);
    }
    Matrix v = s.vt.transposed();
    for (std::size_t i = 0; i < v.rows(); ++i)
        for (std::size_t j = 0; j < v.cols(); ++j) v(i, j) /= s.sigma[j];
    return matmul(v, s.u.transposed());
}

std::vector<std::complex<double>> eigenvalues(const Matrix& m) {
    if (m.rows() != m.cols()) {
        throw ShapeError("eigenvalues: matrix must be square, got " +
                         std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    }
    Matrix h = m;
    hessenberg_reduce(h);
    auto eig = hessenberg_qr_eigenvalues(std::move(h));
    std::stable_sort(eig.begin(), eig.end(), [](const auto& a, const auto& b) {
        const double ma = std::abs(a), mb = std::abs(b);
        if (ma != mb) return ma > mb;
        if (a.real() != b.real()) return a.real() > b.real();
        return a.imag() > b.imag();
    });
    return eig;
}

std::pair<Matrix, Matrix> qr_decompose(const Matrix& m) {
    if (m.rows() < m.cols()) {
        throw ShapeError("qr_decompose: need rows >= cols, got " +
                         std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    }
    const std::size_t n = m.rows(), p = m.cols();
    Matrix r = m;
    std::vector<std::vector<double>> reflectors;  // Householder vectors, length n
    reflectors.reserve(p);

    for (std::size_t k = 0; k < p; ++k) {
        double norm2 = 0.0;
        for (std::size_t i = k; i < n; ++i) norm2 += r(i, k) * r(i, k);
        const double norm = std::sqrt(norm2);
        std::vector<double> v(n, 0.0);
        if (norm == 0.0) {
            reflectors.push_back(std::move(v));
            continue;
        }
        const double alpha = -sign_with(norm, r(k, k));
        for (std::size_t i = k; i < n; ++i) v[i] = r(i, k);
        v[k] -= alpha;
        double vnorm2 = 0.0;
        for (std::size_t i = k; i < n; ++i) vnorm2 += v[i] * v[i];
        if (vnorm2 > 0.0) {
            for (std::size_t j = k; j < p; ++j) {
                double dot = 0.0;
                for (std::size_t i = k; i < n; ++i) dot += v[i] * r(i, j);
                const double f = 2.0 * dot / vnorm2;
                for (std::size_t i = k; i < n; ++i) r(i, j) -= f * v[i];
            }
        }
        r(k, k) = alpha;
        for (std::size_t i = k + 1; i < n; ++i) r(i, k) = 0.0;
        reflectors.push_back(std::move(v));
    }

    // Accumulate thin Q by applying the reflectors in reverse to [e_0 .. e_{p-1}].
    Matrix q(n, p);
    for (std::size_t j = 0; j < p; ++j) q(j, j) = 1.0;
    for (std::size_t kk = p; kk-- > 0;) {
        const auto& v = reflectors[kk];
        double vnorm2 = 0.0;
        for (std::size_t i = kk; i < n; ++i) vnorm2 += v[i] * v[i];
        if (vnorm2 == 0.0) continue;
        for (std::size_t j = 0; j < p; ++j) {
            double dot = 0.0;
            for (std::size_t i = kk; i < n; ++i) dot += v[i] * q(i, j);
            const double f = 2.0 * dot / vnorm2;
            for (std::size_t i = kk; i < n; ++i) q(i, j) -= f * v[i];
        }
    }

    // Keep the thin p-by-p factor and normalize to a non-negative diagonal.
    Matrix r_thin(p, p);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = i; j < p; ++j) r_thin(i, j) = r(i, j);
    for (std::size_t k = 0; k < p; ++k) {
        if (r_thin(k, k) < 0.0) {
            for (std::size_t j = k; j < p; ++j) r_thin(k, j) = -r_thin(k, j);
            for (std::size_t i = 0; i < n; ++i) q(i, k) = -q(i, k);
        }
    }
    return {std::move(q), std::move(r_thin)};
}

}  // namespace lorma
