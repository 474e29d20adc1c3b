#include "ontotkge/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <sstream>

#include "ontotkge/eval.hpp"
#include "ontotkge/optim.hpp"

namespace onto {

namespace {
std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}
}  // namespace

DatasetBundle subset_train_fraction(const DatasetBundle& raw, double fraction) {
    if (raw.augmented) throw Error("subset_train_fraction expects a non-augmented bundle");
    if (fraction <= 0.0 || fraction > 1.0) throw ConfigError("train_fraction must be in (0,1]");
    if (fraction == 1.0) return raw;
    DatasetBundle out = raw;
    std::map<uint32_t, std::vector<Quadruple>> by_time;
    for (const Quadruple& q : raw.train) by_time[q.t].push_back(q);
    out.train.clear();
    for (auto& [t, facts] : by_time) {
        size_t keep = static_cast<size_t>(
            std::ceil(fraction * static_cast<double>(facts.size())));
        keep = std::max<size_t>(keep, 1);
        for (size_t i = 0; i < keep && i < facts.size(); ++i) out.train.push_back(facts[i]);
    }
    out.compute_train_degree();
    return out;
}

TrainOutput train_model(Model& model, const DatasetBundle& bundle, const RunConfig& cfg,
                        std::ostream* progress, const EpochCallback& callback) {
    if (!bundle.augmented) throw Error("train_model requires an inverse-augmented bundle");
    std::vector<Snapshot> train_snaps = snapshots(bundle, Split::train);
    if (train_snaps.empty()) throw DataError("training split has no facts");

    Adam optimizer(cfg.adam_config());
    std::vector<Tensor*> params = model.params();
    int64_t window = model.config().history_window;

    TrainOutput output;
    std::vector<Tensor> best_params;
    output.best_val_mrr = -1.0;

    for (int64_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        auto epoch_start = std::chrono::steady_clock::now();
        double sum_tkg = 0, sum_hie = 0, sum_cl = 0, sum_total = 0;
        int64_t steps = 0;

        for (size_t i = 0; i < train_snaps.size(); ++i) {
            const Snapshot& snap = train_snaps[i];
            if (snap.facts.empty()) continue;
            std::vector<const Snapshot*> history;
            for (int64_t h = static_cast<int64_t>(i) - window; h < static_cast<int64_t>(i); ++h) {
                if (h >= 0) history.push_back(&train_snaps[static_cast<size_t>(h)]);
            }

            std::vector<Tensor> grads;
            double l_tkg, l_hie, l_cl, l_total;
            try {
                Tape tape;
                ParamScope scope(tape, params);
                Model::StepLosses losses = model.training_losses(history, snap.facts);
                l_tkg = losses.tkg.value();
                l_hie = losses.hie.value();
                l_cl = losses.cl.value();
                l_total = losses.total.value();
                if (!std::isfinite(l_total)) {
                    throw NumericError("non-finite loss");
                }
                tape.backward(losses.total);
                grads.reserve(params.size());
                for (Tensor* p : params) grads.push_back(tape.grad(*p));
            } catch (const NumericError& e) {
                throw NumericError("training aborted at timestamp " + std::to_string(snap.t) +
                                   " (epoch " + std::to_string(epoch) + "): " + e.what());
            }
            optimizer.step(params, grads);
            sum_tkg += l_tkg;
            sum_hie += l_hie;
            sum_cl += l_cl;
            sum_total += l_total;
            ++steps;
        }

        RankReport val = evaluate(model, bundle, Split::valid);
        double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - epoch_start).count();
        EpochRow row;
        row.epoch = epoch;
        row.l_tkg = sum_tkg / std::max<int64_t>(steps, 1);
        row.l_hie = sum_hie / std::max<int64_t>(steps, 1);
        row.l_cl = sum_cl / std::max<int64_t>(steps, 1);
        row.l_total = sum_total / std::max<int64_t>(steps, 1);
        row.val_mrr = val.mrr;
        row.seconds = seconds;
        output.log.push_back(row);
        if (progress) {
            (*progress) << "epoch " << epoch << " loss=" << row.l_total
                        << " val_mrr=" << row.val_mrr << " (" << seconds << "s)\n";
        }
        if (val.mrr > output.best_val_mrr) {
            output.best_val_mrr = val.mrr;
            output.best_epoch = epoch;
            best_params = model.snapshot_params();
        }
        if (callback && callback(epoch, model)) return output;
    }

    if (!best_params.empty()) model.restore_params(best_params);
    return output;
}

std::string training_log_csv(const std::vector<EpochRow>& log) {
    std::ostringstream out;
    out << "epoch,L_tkg,L_hie,L_cl,L_total,val_mrr,seconds\n";
    for (const EpochRow& r : log) {
        out << r.epoch << ',' << fmt(r.l_tkg) << ',' << fmt(r.l_hie) << ',' << fmt(r.l_cl) << ','
            << fmt(r.l_total) << ',' << fmt(r.val_mrr) << ',' << fmt(r.seconds) << '\n';
    }
    return out.str();
}

}  // namespace onto
