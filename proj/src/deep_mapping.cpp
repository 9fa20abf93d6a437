#include "dlm/deep_mapping.hpp"

#include "dlm/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace dlm {

namespace {

Eigen::MatrixXd gather(const Eigen::Ref<const Eigen::MatrixXd>& X, const std::vector<Eigen::Index>& rows)
{
    Eigen::MatrixXd out(Eigen::Index(rows.size()), X.cols());
    for (std::size_t i = 0; i < rows.size(); ++i)
        out.row(Eigen::Index(i)) = X.row(rows[i]);
    return out;
}

SparseRowMatrix gather(const SparseRowMatrix& X, const std::vector<Eigen::Index>& rows)
{
    std::vector<Eigen::Triplet<double>> trip;
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (SparseRowMatrix::InnerIterator it(X, rows[i]); it; ++it)
            trip.emplace_back(Eigen::Index(i), it.col(), it.value());
    SparseRowMatrix out(Eigen::Index(rows.size()), X.cols());
    out.setFromTriplets(trip.begin(), trip.end());
    return out;
}

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& z)
{
    return z.unaryExpr([](double v) {
        if (v >= 0)
            return 1.0 / (1.0 + std::exp(-v));
        const double e = std::exp(v);
        return e / (1.0 + e);
    });
}

struct Forward {
    Eigen::MatrixXd pre;    // X W1 + b1
    Eigen::MatrixXd hidden; // relu(pre)
    Eigen::MatrixXd out;    // hidden W2 + b2 (logits for the binary loss)
};

template <typename XType>
Forward forward(const DeepMapping& m, const XType& X)
{
    if (X.cols() != m.in_dim())
        throw ArgumentError("deep mapping: input has " + std::to_string(X.cols()) +
                            " columns, network expects " + std::to_string(m.in_dim()));
    Forward f;
    f.pre = X * m.w1;
    f.pre.rowwise() += m.b1;
    f.hidden = f.pre.cwiseMax(0.0);
    f.out = f.hidden * m.w2;
    f.out.rowwise() += m.b2;
    return f;
}

double loss_from_output(DeepLoss loss, const Eigen::MatrixXd& out, const Eigen::Ref<const Eigen::MatrixXd>& Y)
{
    const double rows = double(std::max<Eigen::Index>(out.rows(), 1));
    if (loss == DeepLoss::squared_error)
        return 0.5 * (out - Y).squaredNorm() / rows;
    double total = 0;
    for (Eigen::Index j = 0; j < out.cols(); ++j)
        for (Eigen::Index i = 0; i < out.rows(); ++i) {
            const double z = out(i, j);
            total += std::max(z, 0.0) - Y(i, j) * z + std::log1p(std::exp(-std::abs(z)));
        }
    return total / rows;
}

template <typename XType>
double loss_impl(const DeepMapping& m, const XType& X, const Eigen::Ref<const Eigen::MatrixXd>& Y)
{
    if (X.rows() != Y.rows() || Y.cols() != m.out_dim())
        throw ArgumentError("deep mapping: target shape does not match");
    return loss_from_output(m.loss, forward(m, X).out, Y);
}

template <typename XType>
DeepGradients gradients_impl(const DeepMapping& m, const XType& X, const Eigen::Ref<const Eigen::MatrixXd>& Y)
{
    if (X.rows() != Y.rows() || Y.cols() != m.out_dim())
        throw ArgumentError("deep mapping: target shape does not match");
    const Forward f = forward(m, X);
    DeepGradients g;
    g.loss = loss_from_output(m.loss, f.out, Y);
    const double rows = double(std::max<Eigen::Index>(X.rows(), 1));
    Eigen::MatrixXd dout = m.loss == DeepLoss::squared_error ? Eigen::MatrixXd(f.out - Y)
                                                              : Eigen::MatrixXd(sigmoid(f.out) - Y);
    dout /= rows;
    g.w2 = f.hidden.transpose() * dout;
    g.b2 = dout.colwise().sum();
    Eigen::MatrixXd dpre = (dout * m.w2.transpose()).cwiseProduct(
        f.pre.unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; }));
    g.w1 = Eigen::MatrixXd(X.transpose() * dpre);
    g.b1 = dpre.colwise().sum();
    return g;
}

struct Adam {
    double lr, b1 = 0.9, b2 = 0.999, eps = 1e-8;
    long t = 0;
    Eigen::MatrixXd mw1, vw1, mw2, vw2;
    Eigen::RowVectorXd mb1, vb1, mb2, vb2;

    Adam(const DeepMapping& m, double rate) : lr(rate)
    {
        mw1 = vw1 = Eigen::MatrixXd::Zero(m.w1.rows(), m.w1.cols());
        mw2 = vw2 = Eigen::MatrixXd::Zero(m.w2.rows(), m.w2.cols());
        mb1 = vb1 = Eigen::RowVectorXd::Zero(m.b1.size());
        mb2 = vb2 = Eigen::RowVectorXd::Zero(m.b2.size());
    }

    template <typename P, typename G, typename M>
    void step(P& param, const G& grad, M& mom, M& var, double c1, double c2) const
    {
        mom = b1 * mom + (1 - b1) * grad;
        var = b2 * var + (1 - b2) * grad.cwiseAbs2();
        param.array() -= lr * (mom.array() / c1) / ((var.array() / c2).sqrt() + eps);
    }

    void update(DeepMapping& m, const DeepGradients& g)
    {
        ++t;
        const double c1 = 1 - std::pow(b1, double(t));
        const double c2 = 1 - std::pow(b2, double(t));
        step(m.w1, g.w1, mw1, vw1, c1, c2);
        step(m.b1, g.b1, mb1, vb1, c1, c2);
        step(m.w2, g.w2, mw2, vw2, c1, c2);
        step(m.b2, g.b2, mb2, vb2, c1, c2);
    }
};

template <typename XType>
DeepMapping train_impl(const XType& X, const Eigen::Ref<const Eigen::MatrixXd>& Y, const DeepOptions& opts,
                       Direction direction)
{
    if (X.rows() != Y.rows())
        throw ArgumentError("train_deep: X and Y row counts differ");
    if (X.rows() == 0)
        throw ArgumentError("train_deep: no training rows");
    if (opts.width < 1)
        throw ArgumentError("train_deep: width must be at least 1");
    if (opts.batch_size < 1 || opts.max_epochs < 0 || opts.patience < 1)
        throw ArgumentError("train_deep: batch size, epochs and patience must be positive");
    if (opts.early_stopping && !(opts.validation_fraction > 0.0 && opts.validation_fraction < 1.0))
        throw ArgumentError("train_deep: early-stop fraction must lie in (0,1)");
    if (opts.loss == DeepLoss::binary_cross_entropy &&
        ((Y.array() != 0.0) && (Y.array() != 1.0)).any())
        throw ArgumentError("train_deep: binary cross-entropy needs 0/1 targets");

    std::mt19937_64 rng(opts.seed);
    DeepMapping m = init_deep(X.cols(), opts.width, Y.cols(), opts.loss, rng());
    m.direction = direction;
    m.record.seed = opts.seed;

    std::vector<Eigen::Index> order(std::size_t(X.rows()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::vector<Eigen::Index> train_rows = order, val_rows;
    if (opts.early_stopping) {
        std::shuffle(order.begin(), order.end(), rng);
        const auto nval = std::max<std::size_t>(
            1, std::size_t(std::llround(opts.validation_fraction * double(order.size()))));
        if (nval >= order.size())
            throw ArgumentError("train_deep: validation share leaves no training rows");
        val_rows.assign(order.begin(), order.begin() + std::ptrdiff_t(nval));
        train_rows.assign(order.begin() + std::ptrdiff_t(nval), order.end());
        std::sort(val_rows.begin(), val_rows.end());
        std::sort(train_rows.begin(), train_rows.end());
    }
    const XType Xtr = gather(X, train_rows);
    const Eigen::MatrixXd Ytr = gather(Y, train_rows);
    const XType Xval = opts.early_stopping ? gather(X, val_rows) : XType();
    const Eigen::MatrixXd Yval = opts.early_stopping ? gather(Y, val_rows) : Eigen::MatrixXd();

    Adam adam(m, opts.learning_rate);
    DeepMapping best = m;
    double best_loss = std::numeric_limits<double>::infinity();
    int stale = 0;
    std::vector<Eigen::Index> perm(train_rows.size());
    std::iota(perm.begin(), perm.end(), Eigen::Index{0});

    for (int epoch = 1; epoch <= opts.max_epochs; ++epoch) {
        std::shuffle(perm.begin(), perm.end(), rng);
        for (std::size_t start = 0; start < perm.size(); start += std::size_t(opts.batch_size)) {
            const auto stop = std::min(perm.size(), start + std::size_t(opts.batch_size));
            const std::vector<Eigen::Index> batch(perm.begin() + std::ptrdiff_t(start),
                                                  perm.begin() + std::ptrdiff_t(stop));
            const XType xb = gather(Xtr, batch);
            const Eigen::MatrixXd yb = gather(Ytr, batch);
            adam.update(m, gradients_impl(m, xb, yb));
        }
        DeepEpoch rec;
        rec.epoch = epoch;
        rec.train_loss = loss_impl(m, Xtr, Ytr);
        rec.validation_loss = opts.early_stopping ? loss_impl(m, Xval, Yval)
                                                  : std::numeric_limits<double>::quiet_NaN();
        m.record.history.push_back(rec);
        m.record.epochs_run = epoch;
        const double monitored = opts.early_stopping ? rec.validation_loss : rec.train_loss;
        if (!std::isfinite(rec.train_loss))
            throw Error("train_deep: loss diverged at epoch " + std::to_string(epoch));
        if (monitored < best_loss) {
            best_loss = monitored;
            best.w1 = m.w1;
            best.b1 = m.b1;
            best.w2 = m.w2;
            best.b2 = m.b2;
            m.record.best_epoch = epoch;
            m.record.improvements.push_back(epoch);
            stale = 0;
        } else if (opts.early_stopping && ++stale >= opts.patience) {
            break;
        }
    }
    best.record = m.record;
    best.direction = direction;
    return best;
}

template <typename XType>
Eigen::MatrixXd apply_impl(const DeepMapping& m, const XType& X)
{
    Forward f = forward(m, X);
    if (m.loss == DeepLoss::binary_cross_entropy)
        return sigmoid(f.out);
    return std::move(f.out);
}

} // namespace

std::string to_string(DeepLoss l)
{
    return l == DeepLoss::squared_error ? "squared-error" : "binary-cross-entropy";
}

DeepLoss parse_deep_loss(const std::string& s)
{
    if (s == "squared-error" || s == "mse" || s == "se")
        return DeepLoss::squared_error;
    if (s == "binary-cross-entropy" || s == "bce")
        return DeepLoss::binary_cross_entropy;
    throw ArgumentError("unknown deep loss '" + s + "'");
}

DeepMapping init_deep(Eigen::Index in_dim, Eigen::Index width, Eigen::Index out_dim, DeepLoss loss,
                      std::uint64_t seed)
{
    if (width < 1)
        throw ArgumentError("deep mapping: width must be at least 1");
    std::mt19937_64 rng(seed);
    auto uniform = [&](Eigen::Index rows, Eigen::Index cols, double bound) {
        std::uniform_real_distribution<double> u(-bound, bound);
        Eigen::MatrixXd w(rows, cols);
        for (Eigen::Index j = 0; j < cols; ++j)
            for (Eigen::Index i = 0; i < rows; ++i)
                w(i, j) = u(rng);
        return w;
    };
    DeepMapping m;
    m.loss = loss;
    m.w1 = uniform(in_dim, width, 1.0 / std::sqrt(double(std::max<Eigen::Index>(in_dim, 1))));
    m.b1 = Eigen::RowVectorXd::Zero(width);
    m.w2 = uniform(width, out_dim, 1.0 / std::sqrt(double(width)));
    m.b2 = Eigen::RowVectorXd::Zero(out_dim);
    return m;
}

double deep_loss(const DeepMapping& m, const Eigen::Ref<const Eigen::MatrixXd>& X,
                 const Eigen::Ref<const Eigen::MatrixXd>& Y)
{
    return loss_impl(m, X, Y);
}

DeepGradients deep_gradients(const DeepMapping& m, const Eigen::Ref<const Eigen::MatrixXd>& X,
                             const Eigen::Ref<const Eigen::MatrixXd>& Y)
{
    return gradients_impl(m, X, Y);
}

DeepMapping train_deep(const Eigen::Ref<const Eigen::MatrixXd>& X,
                       const Eigen::Ref<const Eigen::MatrixXd>& Y, const DeepOptions& opts,
                       Direction direction)
{
    return train_impl(Eigen::MatrixXd(X), Y, opts, direction);
}

DeepMapping train_deep(const SparseRowMatrix& X, const Eigen::Ref<const Eigen::MatrixXd>& Y,
                       const DeepOptions& opts, Direction direction)
{
    return train_impl(X, Y, opts, direction);
}

Eigen::MatrixXd apply_mapping(const DeepMapping& m, const Eigen::Ref<const Eigen::MatrixXd>& X)
{
    return apply_impl(m, X);
}

Eigen::MatrixXd apply_mapping(const DeepMapping& m, const SparseRowMatrix& X)
{
    return apply_impl(m, X);
}

} // namespace dlm
