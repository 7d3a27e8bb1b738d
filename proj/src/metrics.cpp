#include "salkit/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace salkit {

namespace {

void require_same_shape(const SaliencyMap& a, const SaliencyMap& b, const char* op) {
    if (!a.same_shape(b))
        throw Error(ErrorKind::ShapeMismatch, std::string(op) + ": " + std::to_string(a.height()) +
                                                  "x" + std::to_string(a.width()) + " vs " +
                                                  std::to_string(b.height()) + "x" +
                                                  std::to_string(b.width()));
}

void require_distribution(const SaliencyMap& m, const char* op) {
    if (m.state() != MapState::Distribution)
        throw Error(ErrorKind::WrongState,
                    std::string(op) + " requires a Distribution map, got " + map_state_name(m.state()));
}

void require_fix_bounds(const SaliencyMap& pred, const FixationSet& fix, const char* op) {
    if (fix.height() != pred.height() || fix.width() != pred.width())
        throw Error(ErrorKind::ShapeMismatch, std::string(op) + ": fixation bounds do not match map");
}

// Fraction of `sorted` (ascending) that is >= threshold.
double frac_at_or_above(const std::vector<double>& sorted, double threshold) {
    auto it = std::lower_bound(sorted.begin(), sorted.end(), threshold);
    return static_cast<double>(sorted.end() - it) / static_cast<double>(sorted.size());
}

// ROC area for explicit positive/negative sample values, thresholding at
// each positive value, ties counted as positive.
double roc_area(std::vector<double> pos, std::vector<double> neg) {
    std::vector<double> thresholds = pos;
    std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
    std::sort(pos.begin(), pos.end());
    std::sort(neg.begin(), neg.end());

    double area = 0.0;
    double prev_tpr = 0.0, prev_fpr = 0.0;
    for (double t : thresholds) {
        double tpr = frac_at_or_above(pos, t);
        double fpr = frac_at_or_above(neg, t);
        area += (fpr - prev_fpr) * (tpr + prev_tpr) / 2.0;
        prev_tpr = tpr;
        prev_fpr = fpr;
    }
    area += (1.0 - prev_fpr) * (1.0 + prev_tpr) / 2.0;
    return area;
}

} // namespace

const char* metric_kind_name(MetricKind kind) {
    switch (kind) {
    case MetricKind::KLdiv: return "kldiv";
    case MetricKind::CC: return "cc";
    case MetricKind::NSS: return "nss";
    case MetricKind::SIM: return "sim";
    case MetricKind::AUC: return "auc";
    case MetricKind::SAUC: return "sauc";
    case MetricKind::IG: return "ig";
    case MetricKind::EMD: return "emd";
    }
    return "?";
}

std::optional<MetricKind> parse_metric_kind(const std::string& name) {
    for (MetricKind k : {MetricKind::KLdiv, MetricKind::CC, MetricKind::NSS, MetricKind::SIM,
                         MetricKind::AUC, MetricKind::SAUC, MetricKind::IG, MetricKind::EMD})
        if (name == metric_kind_name(k)) return k;
    return std::nullopt;
}

double kldiv(const SaliencyMap& pred, const SaliencyMap& gt, const EpsilonConfig& eps) {
    require_same_shape(pred, gt, "kldiv");
    require_distribution(pred, "kldiv");
    require_distribution(gt, "kldiv");
    auto p = pred.values();
    auto q = gt.values();
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        acc += q[i] * std::log(eps.eps + q[i] / (p[i] + eps.eps));
    return acc;
}

double cc(const SaliencyMap& a, const SaliencyMap& b) {
    require_same_shape(a, b, "cc");
    auto va = a.values();
    auto vb = b.values();
    const double n = static_cast<double>(va.size());
    double ma = a.sum() / n, mb = b.sum() / n;
    double cov = 0.0, var_a = 0.0, var_b = 0.0;
    for (std::size_t i = 0; i < va.size(); ++i) {
        double da = va[i] - ma, db = vb[i] - mb;
        cov += da * db;
        var_a += da * da;
        var_b += db * db;
    }
    if (var_a == 0.0 || var_b == 0.0)
        throw Error(ErrorKind::ConstantMap, "cc is undefined for a constant map");
    return cov / std::sqrt(var_a * var_b);
}

double nss(const SaliencyMap& pred, const FixationSet& fix) {
    if (fix.empty())
        throw Error(ErrorKind::EmptyFixations, "nss requires at least one fixation");
    require_fix_bounds(pred, fix, "nss");
    SaliencyMap z = standardize(pred);
    double acc = 0.0;
    for (const Fixation& p : fix.points()) acc += z.at(p.y, p.x);
    return acc / static_cast<double>(fix.size());
}

double sim(const SaliencyMap& pred, const SaliencyMap& gt) {
    require_same_shape(pred, gt, "sim");
    require_distribution(pred, "sim");
    require_distribution(gt, "sim");
    auto p = pred.values();
    auto q = gt.values();
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) acc += std::min(p[i], q[i]);
    return acc;
}

double auc_judd(const SaliencyMap& pred, const FixationSet& fix) {
    if (fix.empty())
        throw Error(ErrorKind::EmptyFixations, "auc requires at least one fixation");
    require_fix_bounds(pred, fix, "auc");

    std::vector<char> fixated(pred.size(), 0);
    for (const Fixation& p : fix.points())
        fixated[static_cast<std::size_t>(p.y) * pred.width() + p.x] = 1;

    std::vector<double> pos, neg;
    auto vals = pred.values();
    for (std::size_t i = 0; i < vals.size(); ++i)
        (fixated[i] ? pos : neg).push_back(vals[i]);
    if (neg.empty())
        throw Error(ErrorKind::InvalidArgument, "auc: every pixel is fixated, no negatives remain");
    return roc_area(std::move(pos), std::move(neg));
}

double sauc(const SaliencyMap& pred, const FixationSet& fix, const FixationSet& negatives) {
    if (fix.empty())
        throw Error(ErrorKind::EmptyFixations, "sauc requires at least one fixation");
    if (negatives.empty())
        throw Error(ErrorKind::EmptyNegatives, "sauc requires at least one negative fixation");
    require_fix_bounds(pred, fix, "sauc");
    require_fix_bounds(pred, negatives, "sauc");

    std::vector<double> pos, neg;
    for (const Fixation& p : fix.unique_points()) pos.push_back(pred.at(p.y, p.x));
    for (const Fixation& p : negatives.unique_points()) neg.push_back(pred.at(p.y, p.x));
    return roc_area(std::move(pos), std::move(neg));
}

double info_gain(const SaliencyMap& pred, const SaliencyMap& baseline, const FixationSet& fix,
                 const EpsilonConfig& eps) {
    require_same_shape(pred, baseline, "info_gain");
    require_distribution(pred, "info_gain");
    require_distribution(baseline, "info_gain");
    if (fix.empty())
        throw Error(ErrorKind::EmptyFixations, "info_gain requires at least one fixation");
    require_fix_bounds(pred, fix, "info_gain");
    double acc = 0.0;
    for (const Fixation& p : fix.points())
        acc += std::log2(pred.at(p.y, p.x) + eps.eps) - std::log2(baseline.at(p.y, p.x) + eps.eps);
    return acc / static_cast<double>(fix.size());
}

std::optional<double> MetricReport::get(MetricKind kind) const {
    switch (kind) {
    case MetricKind::KLdiv: return kldiv;
    case MetricKind::CC: return cc;
    case MetricKind::NSS: return nss;
    case MetricKind::SIM: return sim;
    case MetricKind::AUC: return auc;
    case MetricKind::SAUC: return sauc;
    case MetricKind::IG: return ig;
    case MetricKind::EMD: return emd;
    }
    return std::nullopt;
}

MetricReport evaluate_all(const SaliencyMap& pred, const SaliencyMap& gt_density,
                          const FixationSet& fix, const FixationSet* negatives,
                          const SaliencyMap* baseline, const EvaluateOptions& opts) {
    require_same_shape(pred, gt_density, "evaluate_all");
    if (pred.state() == MapState::Standardized || gt_density.state() == MapState::Standardized)
        throw Error(ErrorKind::WrongState, "evaluate_all expects Raw or Distribution inputs");

    auto wanted = [&](MetricKind k) { return opts.select.empty() || opts.select.count(k) > 0; };

    SaliencyMap p_dist = normalize_to_distribution(pred);
    SaliencyMap q_dist = normalize_to_distribution(gt_density);

    MetricReport report;
    if (wanted(MetricKind::KLdiv)) report.kldiv = kldiv(p_dist, q_dist, opts.eps);
    if (wanted(MetricKind::CC)) report.cc = cc(pred, gt_density);
    if (wanted(MetricKind::NSS)) report.nss = nss(pred, fix);
    if (wanted(MetricKind::SIM)) report.sim = sim(p_dist, q_dist);
    if (wanted(MetricKind::AUC)) report.auc = auc_judd(pred, fix);
    if (wanted(MetricKind::SAUC) && negatives != nullptr)
        report.sauc = sauc(pred, fix, *negatives);
    if (wanted(MetricKind::IG)) {
        if (baseline != nullptr) {
            report.ig = info_gain(p_dist, normalize_to_distribution(*baseline), fix, opts.eps);
        } else if (opts.uniform_ig_baseline) {
            double u = 1.0 / static_cast<double>(pred.size());
            SaliencyMap uniform(pred.height(), pred.width(),
                                std::vector<double>(pred.size(), u), MapState::Distribution);
            report.ig = info_gain(p_dist, uniform, fix, opts.eps);
        }
    }
    if (wanted(MetricKind::EMD) && pred.size() <= kEmdMaxCells)
        report.emd = emd(p_dist, q_dist);
    return report;
}

} // namespace salkit
