#include "leapgrid/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "leapgrid/errors.hpp"
#include "leapgrid/rng.hpp"

namespace leapgrid {

DataMatrices to_matrices(const Dataset& dataset) {
    const auto n = static_cast<int>(dataset.rows.size());
    DataMatrices m;
    m.x = Tensor2(n, dataset.header.n_x);
    m.tau = Tensor2(n, dataset.header.n_tau);
    m.y = Tensor2(n, dataset.header.n_y);
    for (int i = 0; i < n; ++i) {
        const DatasetRow& row = dataset.rows[i];
        if (static_cast<int>(row.x.size()) != dataset.header.n_x ||
            static_cast<int>(row.tau.size()) != dataset.header.n_tau ||
            static_cast<int>(row.y.size()) != dataset.header.n_y) {
            throw ShapeError("dataset row " + std::to_string(i) + " has inconsistent dimensions");
        }
        for (int j = 0; j < m.x.cols; ++j) m.x(i, j) = row.x[j];
        for (int j = 0; j < m.tau.cols; ++j) m.tau(i, j) = row.tau.bits[j];
        for (int j = 0; j < m.y.cols; ++j) m.y(i, j) = row.y[j];
    }
    return m;
}

namespace {

const Standardizer& y_std_of(const SurrogateModel& model) {
    return std::visit([](const auto& net) -> const Standardizer& { return net.y_std; }, model);
}

void set_standardizers(SurrogateModel& model, const Standardizer& xs, const Standardizer& ys) {
    std::visit(
        [&](auto& net) {
            net.x_std = xs;
            net.y_std = ys;
        },
        model);
}

Tensor2 take_rows(const Tensor2& src, const std::vector<int>& idx, int begin, int end) {
    Tensor2 out(end - begin, src.cols);
    for (int i = begin; i < end; ++i) {
        const int r = idx[i];
        for (int j = 0; j < src.cols; ++j) out(i - begin, j) = src(r, j);
    }
    return out;
}

// One minibatch forward/backward/update; returns the batch loss.
double train_batch(SurrogateModel& model, const Tensor2& x_std_batch, const Tensor2& tau_batch,
                   const Tensor2& y_std_batch, AdamState& adam) {
    return std::visit(
        [&](auto& net) {
            typename std::decay_t<decltype(net)>::Cache cache;
            const Tensor2 pred = net.forward_std(x_std_batch, tau_batch, &cache);
            const MseResult mse = mse_loss(pred, y_std_batch);
            auto grads = net.backward(cache, mse.grad);
            auto params = net.params();
            const auto grad_list = net.grad_params(grads);
            adam_step(params, grad_list, adam);
            return mse.loss;
        },
        model);
}

double full_mse_std(const SurrogateModel& model, const Tensor2& x_std_all, const Tensor2& tau,
                    const Tensor2& y_std_all) {
    return std::visit(
        [&](const auto& net) {
            const Tensor2 pred = net.forward_std(x_std_all, tau, nullptr);
            return mse_loss(pred, y_std_all).loss;
        },
        model);
}

struct TrainTensors {
    Tensor2 x_std;
    Tensor2 y_std;
};

// Short CV runs on a held-out source split pick the baseline learning rate.
double cross_validate_lr(const SurrogateModel& model, const TrainTensors& data,
                         const Tensor2& tau, const TrainConfig& config) {
    if (config.cv_learning_rates.size() < 2) {
        return config.cv_learning_rates.empty() ? config.learning_rate
                                                : config.cv_learning_rates.front();
    }
    const int n = data.x_std.rows;
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(mix_seed(config.seed, 0xCF));
    shuffle_vector(idx, rng);
    const int holdout = std::max(1, static_cast<int>(n * config.cv_holdout_fraction));
    const int fit_n = n - holdout;
    if (fit_n < 1) return config.learning_rate;

    const Tensor2 fit_x = take_rows(data.x_std, idx, 0, fit_n);
    const Tensor2 fit_tau = take_rows(tau, idx, 0, fit_n);
    const Tensor2 fit_y = take_rows(data.y_std, idx, 0, fit_n);
    const Tensor2 val_x = take_rows(data.x_std, idx, fit_n, n);
    const Tensor2 val_tau = take_rows(tau, idx, fit_n, n);
    const Tensor2 val_y = take_rows(data.y_std, idx, fit_n, n);

    double best_lr = config.cv_learning_rates.front();
    double best_loss = std::numeric_limits<double>::infinity();
    for (double lr : config.cv_learning_rates) {
        SurrogateModel candidate = model;  // deep copy
        AdamState adam = std::visit(
            [&](auto& net) { return make_adam_state(net.params(), AdamConfig{lr, 0.9, 0.999, 1e-8}); },
            candidate);
        std::mt19937_64 cv_rng(mix_seed(config.seed, 0xC0));
        std::vector<int> order(fit_n);
        std::iota(order.begin(), order.end(), 0);
        for (int epoch = 0; epoch < config.cv_epochs; ++epoch) {
            shuffle_vector(order, cv_rng);
            for (int start = 0; start < fit_n; start += config.batch_size) {
                const int end = std::min(fit_n, start + config.batch_size);
                train_batch(candidate, take_rows(fit_x, order, start, end),
                            take_rows(fit_tau, order, start, end),
                            take_rows(fit_y, order, start, end), adam);
            }
        }
        const double loss = full_mse_std(candidate, val_x, val_tau, val_y);
        if (loss < best_loss) {
            best_loss = loss;
            best_lr = lr;
        }
    }
    return best_lr;
}

}  // namespace

EvalMetrics evaluate_model(const SurrogateModel& model, const DataMatrices& data) {
    EvalMetrics out;
    const Tensor2 pred = model_predict(model, data.x, data.tau);
    const Standardizer& ys = y_std_of(model);

    double acc_mw2 = 0.0;
    double acc_std = 0.0;
    double mape_acc = 0.0;
    long mape_n = 0;
    for (int i = 0; i < pred.rows; ++i) {
        for (int j = 0; j < pred.cols; ++j) {
            const double diff = pred(i, j) - data.y(i, j);
            acc_mw2 += diff * diff;
            const double ds = diff / ys.scale[j];
            acc_std += ds * ds;
            if (std::abs(data.y(i, j)) >= 1.0) {  // 1 MW floor
                mape_acc += std::abs(diff) / std::abs(data.y(i, j));
                ++mape_n;
            }
        }
    }
    const double n = static_cast<double>(pred.size());
    out.mse_mw2 = acc_mw2 / n;
    out.mse_std = acc_std / n;
    out.mape_pct = mape_n > 0 ? 100.0 * mape_acc / static_cast<double>(mape_n) : 0.0;
    return out;
}

TrainResult train_model(SurrogateModel& model, const DataMatrices& train_data,
                        const DataMatrices* regular_test, const DataMatrices* super_test,
                        const TrainConfig& config, AdamState* resume_adam, int start_epoch) {
    if (train_data.x.rows == 0) throw ShapeError("training dataset is empty");

    if (start_epoch == 0) {
        set_standardizers(model, Standardizer::fit(train_data.x), Standardizer::fit(train_data.y));
    }
    const Standardizer& xs = std::visit([](const auto& n) -> const Standardizer& { return n.x_std; }, model);
    const Standardizer& ys = y_std_of(model);
    TrainTensors tt{xs.transform(train_data.x), ys.transform(train_data.y)};

    TrainResult result;
    double lr = config.learning_rate;
    if (kind_of(model) == ModelKind::baseline && start_epoch == 0 &&
        config.cv_learning_rates.size() > 1) {
        lr = cross_validate_lr(model, tt, train_data.tau, config);
    }
    result.chosen_learning_rate = lr;

    AdamState local_adam;
    AdamState* adam = resume_adam;
    if (!adam || adam->m.empty()) {
        local_adam = std::visit(
            [&](auto& net) { return make_adam_state(net.params(), AdamConfig{lr, 0.9, 0.999, 1e-8}); },
            model);
        adam = &local_adam;
    }

    const int n = train_data.x.rows;
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 shuffle_rng(mix_seed(config.seed, 0x5F + static_cast<std::uint64_t>(start_epoch)));

    for (int epoch = start_epoch + 1; epoch <= start_epoch + config.epochs; ++epoch) {
        adam->cfg.lr = lr * std::pow(config.lr_decay, static_cast<double>(epoch - 1));
        shuffle_vector(order, shuffle_rng);
        int batch_index = 0;
        for (int start = 0; start < n; start += config.batch_size, ++batch_index) {
            const int end = std::min(n, start + config.batch_size);
            const double loss =
                train_batch(model, take_rows(tt.x_std, order, start, end),
                            take_rows(train_data.tau, order, start, end),
                            take_rows(tt.y_std, order, start, end), *adam);
            if (!std::isfinite(loss)) {
                throw NumericsError("non-finite loss at epoch " + std::to_string(epoch) +
                                    ", batch " + std::to_string(batch_index));
            }
        }

        const bool last = epoch == start_epoch + config.epochs;
        if (last || config.eval_every <= 1 || (epoch % config.eval_every) == 0) {
            EpochRecord rec;
            rec.epoch = epoch;
            rec.train = evaluate_model(model, train_data);
            if (regular_test) rec.regular_test = evaluate_model(model, *regular_test);
            if (super_test) rec.super_test = evaluate_model(model, *super_test);
            result.history.push_back(std::move(rec));
        }
    }

    result.final_train_mse_std = evaluate_model(model, train_data).mse_std;
    result.epochs_trained = start_epoch + config.epochs;
    if (resume_adam && adam == &local_adam) *resume_adam = local_adam;
    return result;
}

SurrogateModel make_model(ModelKind kind, int n_x, int n_tau, int n_y, int hidden,
                          int units_per_action, std::uint64_t seed) {
    LeapNetConfig leap_cfg;
    leap_cfg.n_x = n_x;
    leap_cfg.n_tau = n_tau;
    leap_cfg.n_y = n_y;
    leap_cfg.hidden = hidden;
    leap_cfg.units_per_action = units_per_action;
    if (kind == ModelKind::leap) {
        return LeapNet::init(leap_cfg, seed);
    }
    BaselineConfig base_cfg;
    base_cfg.n_x = n_x;
    base_cfg.n_tau = n_tau;
    base_cfg.n_y = n_y;
    base_cfg.hidden = baseline_parity_hidden(leap_cfg);
    return BaselineNet::init(base_cfg, seed);
}

}  // namespace leapgrid
