#include "saldet/losses.hpp"

#include <algorithm>
#include <cmath>

#include "saldet/errors.hpp"

namespace saldet {

namespace {

/// (1 - p)^gamma with exact fast paths for the common integer exponents.
double focus_term(double one_minus_p, double gamma) {
    if (gamma == 0.0) {
        return 1.0;
    }
    if (gamma == 1.0) {
        return one_minus_p;
    }
    if (gamma == 2.0) {
        return one_minus_p * one_minus_p;
    }
    return std::pow(one_minus_p, gamma);
}

} // namespace

void validate(const FocalParams& fp) {
    if (!(std::isfinite(fp.alpha_fl) && fp.alpha_fl > 0.0)) {
        throw ConfigError("alpha_fl must be finite and > 0");
    }
    if (!(std::isfinite(fp.gamma) && fp.gamma >= 0.0)) {
        throw ConfigError("gamma must be finite and >= 0");
    }
}

void validate(const SalienceParams& sp) {
    if (!(std::isfinite(sp.alpha_ss) && sp.alpha_ss >= 1.0)) {
        throw ConfigError("alpha_ss must be finite and >= 1");
    }
}

Probability::Probability(double raw, double epsilon) {
    if (!std::isfinite(raw)) {
        throw DomainError("probability must be finite");
    }
    p_ = std::max(raw, epsilon);
    if (!(p_ > 0.0 && p_ <= 1.0)) {
        throw DomainError("probability " + std::to_string(raw) + " outside (0, 1]");
    }
}

double focal_loss(Probability p, const FocalParams& fp) {
    const double pt = p.value();
    const double loss = -fp.alpha_fl * focus_term(1.0 - pt, fp.gamma) * std::log(pt);
    if (!std::isfinite(loss)) {
        throw DomainError("focal loss is non-finite");
    }
    return loss;
}

double focal_loss_grad(Probability p, const FocalParams& fp) {
    const double pt = p.value();
    const double one_minus = 1.0 - pt;
    double focusing_term = 0.0;
    // gamma == 0 drops the focusing term entirely; at pt == 1 the limit of
    // gamma * (1-p)^(gamma-1) * log(p) is 0 for every gamma > 0.
    if (fp.gamma != 0.0 && pt != 1.0) {
        focusing_term = fp.gamma * focus_term(one_minus, fp.gamma - 1.0) * std::log(pt);
    }
    const double grad = fp.alpha_fl * focusing_term - fp.alpha_fl * focus_term(one_minus, fp.gamma) / pt;
    if (!std::isfinite(grad)) {
        throw DomainError("focal loss gradient is non-finite");
    }
    return grad;
}

double salience_weight(const Box& d, std::span<const SignAnnotation> gts,
                       const SalienceParams& sp) {
    if (gts.empty()) {
        return SalienceParams::background_weight;
    }
    const SignAnnotation* nearest = &gts[0];
    double best = center_distance(d, gts[0].box);
    for (std::size_t i = 1; i < gts.size(); ++i) {
        const double dist = center_distance(d, gts[i].box);
        if (dist < best || (dist == best && gts[i].id < nearest->id)) {
            best = dist;
            nearest = &gts[i];
        }
    }
    return nearest->salient ? sp.alpha_ss : 1.0;
}

double ssfl(Probability p, const Box& d, std::span<const SignAnnotation> gts,
            const FocalParams& fp, const SalienceParams& sp) {
    return salience_weight(d, gts, sp) * focal_loss(p, fp);
}

LossMode loss_mode_from_string(std::string_view s) {
    if (s == "fl") {
        return LossMode::FL;
    }
    if (s == "ssfl") {
        return LossMode::SSFL;
    }
    throw ConfigError("unknown loss mode '" + std::string(s) + "' (expected 'fl' or 'ssfl')");
}

std::string_view to_string(LossMode mode) {
    return mode == LossMode::FL ? "fl" : "ssfl";
}

BatchLossResult weighted_focal_batch(std::span<const Probability> ps,
                                     std::span<const double> weights, const FocalParams& fp) {
    if (ps.empty()) {
        throw EmptyBatch("loss reduction over an empty candidate list");
    }
    if (ps.size() != weights.size()) {
        throw DomainError("probability and weight lists differ in length");
    }
    const double inv_n = 1.0 / static_cast<double>(ps.size());
    BatchLossResult result;
    result.gradients.resize(ps.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < ps.size(); ++i) {
        sum += weights[i] * focal_loss(ps[i], fp);
        result.gradients[i] = weights[i] * focal_loss_grad(ps[i], fp) * inv_n;
    }
    result.total = sum * inv_n;
    return result;
}

BatchLossResult batch_loss(std::span<const LossCandidate> candidates,
                           std::span<const SignAnnotation> gts, const FocalParams& fp,
                           const SalienceParams& sp, LossMode mode) {
    if (candidates.empty()) {
        throw EmptyBatch("loss reduction over an empty candidate list");
    }
    std::vector<Probability> ps;
    std::vector<double> weights;
    ps.reserve(candidates.size());
    weights.reserve(candidates.size());
    for (const auto& c : candidates) {
        ps.push_back(c.p);
        weights.push_back(mode == LossMode::SSFL ? salience_weight(c.box, gts, sp) : 1.0);
    }
    return weighted_focal_batch(ps, weights, fp);
}

} // namespace saldet
