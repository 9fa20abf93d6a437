#include "dlm/linear_mapping.hpp"

#include "dlm/error.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>

namespace dlm {

namespace {

// Above this many entries in X the Gram-matrix route is used instead of a
// complete orthogonal decomposition of X itself.
constexpr Eigen::Index kDirectLimit = 4'000'000;

void check_dims(Eigen::Index xrows, Eigen::Index yrows, double lambda)
{
    if (xrows != yrows)
        throw ArgumentError("solve_endstate: X has " + std::to_string(xrows) + " rows, Y has " +
                            std::to_string(yrows));
    if (!(lambda >= 0.0))
        throw ArgumentError("solve_endstate: ridge lambda must be non-negative");
}

/// Solves (G + lambda I) Z = B in place of G. Falls back to the
/// pseudo-inverse when lambda = 0 and G is numerically singular.
Eigen::MatrixXd solve_gram(Eigen::MatrixXd& G, const Eigen::MatrixXd& B, double lambda)
{
    const Eigen::Index n = G.rows();
    const double scale = std::max(G.diagonal().maxCoeff(), 1e-300);
    if (lambda > 0.0)
        G.diagonal().array() += lambda;
    {
        Eigen::MatrixXd saved_diag = G.diagonal();
        Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>> llt(G);
        bool ok = llt.info() == Eigen::Success;
        if (ok && lambda == 0.0) {
            const auto d = G.diagonal().cwiseAbs2();
            ok = d.minCoeff() > scale * double(n) * std::numeric_limits<double>::epsilon() * 1e3;
        }
        if (ok)
            return llt.solve(B);
        // LLT overwrote the lower triangle; the upper triangle still holds G.
        G.diagonal() = saved_diag;
        for (Eigen::Index j = 0; j + 1 < n; ++j)
            G.col(j).tail(n - j - 1) = G.row(j).tail(n - j - 1).transpose();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(G);
    const auto& ev = eig.eigenvalues();
    const double tol = std::max(ev.cwiseAbs().maxCoeff(), 1e-300) * double(n) *
                       std::numeric_limits<double>::epsilon();
    Eigen::VectorXd inv = ev.unaryExpr([tol](double v) { return v > tol ? 1.0 / v : 0.0; });
    const Eigen::MatrixXd& V = eig.eigenvectors();
    return V * (inv.asDiagonal() * (V.transpose() * B));
}

LinearMapping make_linear(Eigen::MatrixXd W, Direction dir, Method method)
{
    if (!W.allFinite())
        throw Error("mapping estimation produced non-finite weights");
    LinearMapping m;
    m.weights = std::move(W);
    m.direction = dir;
    m.method = method;
    return m;
}

struct SparseRows {
    std::vector<Eigen::Index> outer{0};
    std::vector<Eigen::Index> inner;
    std::vector<double> values;
};

SparseRows rows_of(const SparseRowMatrix& X)
{
    SparseRows r;
    for (Eigen::Index i = 0; i < X.outerSize(); ++i) {
        for (SparseRowMatrix::InnerIterator it(X, i); it; ++it) {
            r.inner.push_back(it.col());
            r.values.push_back(it.value());
        }
        r.outer.push_back(Eigen::Index(r.inner.size()));
    }
    return r;
}

} // namespace

std::string to_string(Direction d)
{
    return d == Direction::comprehension ? "comprehension" : "production";
}

std::string to_string(Method m)
{
    return m == Method::eol ? "EOL" : "FIL";
}

Direction parse_direction(const std::string& s)
{
    if (s == "comprehension")
        return Direction::comprehension;
    if (s == "production")
        return Direction::production;
    throw ArgumentError("unknown direction '" + s + "'");
}

Method parse_method(const std::string& s)
{
    if (s == "EOL" || s == "eol")
        return Method::eol;
    if (s == "FIL" || s == "fil")
        return Method::fil;
    throw ArgumentError("unknown linear method '" + s + "'");
}

LinearMapping solve_endstate(const Eigen::Ref<const Eigen::MatrixXd>& X,
                             const Eigen::Ref<const Eigen::MatrixXd>& Y, double lambda,
                             Direction direction)
{
    check_dims(X.rows(), Y.rows(), lambda);
    Eigen::MatrixXd W;
    if (lambda == 0.0 && X.size() <= kDirectLimit) {
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(X);
        W = cod.solve(Y);
    } else if (X.cols() <= X.rows()) {
        Eigen::MatrixXd G = X.transpose() * X;
        W = solve_gram(G, X.transpose() * Y, lambda);
    } else {
        Eigen::MatrixXd G = X * X.transpose();
        W = X.transpose() * solve_gram(G, Y, lambda);
    }
    auto m = make_linear(std::move(W), direction, Method::eol);
    m.hyperparams["lambda"] = lambda;
    return m;
}

LinearMapping solve_endstate(const SparseRowMatrix& X, const Eigen::Ref<const Eigen::MatrixXd>& Y,
                             double lambda, Direction direction)
{
    check_dims(X.rows(), Y.rows(), lambda);
    if (lambda == 0.0 && X.rows() * X.cols() <= kDirectLimit)
        return solve_endstate(Eigen::MatrixXd(X), Y, lambda, direction);
    Eigen::MatrixXd W;
    if (X.cols() <= X.rows()) {
        Eigen::MatrixXd G = Eigen::MatrixXd(X.transpose() * X);
        Eigen::MatrixXd XtY = X.transpose() * Y;
        W = solve_gram(G, XtY, lambda);
    } else {
        const SparseRowMatrix Xt = X.transpose();
        Eigen::MatrixXd G = Eigen::MatrixXd::Zero(X.rows(), X.rows());
        // X X^T accumulated cue by cue: rows sharing a cue gain x_ic * x_jc.
        for (Eigen::Index c = 0; c < Xt.outerSize(); ++c) {
            for (SparseRowMatrix::InnerIterator a(Xt, c); a; ++a)
                for (SparseRowMatrix::InnerIterator b(Xt, c); b; ++b)
                    G(a.col(), b.col()) += a.value() * b.value();
        }
        W = Xt * solve_gram(G, Y, lambda);
    }
    auto m = make_linear(std::move(W), direction, Method::eol);
    m.hyperparams["lambda"] = lambda;
    return m;
}

LinearMapping train_frequency_informed(const SparseRowMatrix& X,
                                       const Eigen::Ref<const Eigen::MatrixXd>& Y,
                                       const Eigen::Ref<const Eigen::VectorXd>& freqs,
                                       const FilOptions& opts, Direction direction)
{
    if (X.rows() != Y.rows() || freqs.size() != X.rows())
        throw ArgumentError("train_frequency_informed: X, Y and freqs must have equal row counts");
    if (!(opts.learning_rate > 0.0))
        throw ArgumentError("train_frequency_informed: learning rate must be positive");
    if (opts.epochs < 0)
        throw ArgumentError("train_frequency_informed: epochs must be non-negative");

    std::vector<Eigen::Index> stream;
    for (Eigen::Index i = 0; i < freqs.size(); ++i) {
        if (freqs(i) < 0)
            throw ArgumentError("train_frequency_informed: negative frequency");
        stream.insert(stream.end(), std::size_t(std::llround(freqs(i))), i);
    }
    if (stream.empty())
        throw ArgumentError("train_frequency_informed: all frequencies are zero (empty token stream)");

    const SparseRows rows = rows_of(X);
    // Row-major storage keeps each cue's weight row contiguous for the update.
    RowMatrixXd W = RowMatrixXd::Zero(X.cols(), Y.cols());
    Eigen::RowVectorXd err(Y.cols());
    std::mt19937_64 rng(opts.seed);
    const double eta = opts.learning_rate;
    for (int epoch = 0; epoch < opts.epochs; ++epoch) {
        std::shuffle(stream.begin(), stream.end(), rng);
        for (const auto i : stream) {
            const auto begin = rows.outer[std::size_t(i)];
            const auto end = rows.outer[std::size_t(i) + 1];
            err = Y.row(i);
            for (auto k = begin; k < end; ++k)
                err.noalias() -= rows.values[std::size_t(k)] * W.row(rows.inner[std::size_t(k)]);
            for (auto k = begin; k < end; ++k)
                W.row(rows.inner[std::size_t(k)]).noalias() += (eta * rows.values[std::size_t(k)]) * err;
        }
    }

    auto m = make_linear(Eigen::MatrixXd(W), direction, Method::fil);
    m.hyperparams["learning_rate"] = eta;
    m.hyperparams["epochs"] = opts.epochs;
    m.seed = opts.seed;
    return m;
}

LinearMapping train_frequency_informed(const Eigen::Ref<const Eigen::MatrixXd>& X,
                                       const Eigen::Ref<const Eigen::MatrixXd>& Y,
                                       const Eigen::Ref<const Eigen::VectorXd>& freqs,
                                       const FilOptions& opts, Direction direction)
{
    const SparseRowMatrix sx = X.sparseView(0.0, 0.0);
    return train_frequency_informed(sx, Y, freqs, opts, direction);
}

Eigen::MatrixXd apply_mapping(const LinearMapping& m, const Eigen::Ref<const Eigen::MatrixXd>& X)
{
    if (X.cols() != m.in_dim())
        throw ArgumentError("apply_mapping: input has " + std::to_string(X.cols()) +
                            " columns, mapping expects " + std::to_string(m.in_dim()));
    return X * m.weights;
}

Eigen::MatrixXd apply_mapping(const LinearMapping& m, const SparseRowMatrix& X)
{
    if (X.cols() != m.in_dim())
        throw ArgumentError("apply_mapping: input has " + std::to_string(X.cols()) +
                            " columns, mapping expects " + std::to_string(m.in_dim()));
    return X * m.weights;
}

Eigen::MatrixXd apply_mapping(const LinearMapping& m, const FormMatrix& X)
{
    if (X.cols() != m.in_dim())
        throw ArgumentError("apply_mapping: input has " + std::to_string(X.cols()) +
                            " columns, mapping expects " + std::to_string(m.in_dim()));
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(X.rows(), m.out_dim());
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        for (const auto c : X.active(i))
            out.row(i) += m.weights.row(c);
    return out;
}

} // namespace dlm
