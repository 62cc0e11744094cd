// terrain.hpp - terrain estimation with uncertainty and online corrections.
//
// A prototype-feature classifier stands in for the vision network: class
// scores are cosine similarities between a perturbed feature vector and the
// per-class prototypes, softmaxed and averaged over K stochastic inferences.
// Predictive entropy of the averaged probabilities is normalized into a
// confidence that gates the blend between the visual prior cost M_TO and the
// proprioception-history correction M_TP retrieved from the experience
// buffer by cosine similarity.
#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "topnav/geometry.hpp"
#include "topnav/gridmap.hpp"
#include "topnav/rng.hpp"

namespace topnav {

using Feature = std::vector<double>;

inline double dot(const Feature& a, const Feature& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double feature_norm(const Feature& f) { return std::sqrt(dot(f, f)); }

inline Feature unit_normalized(Feature f) {
    const double n = feature_norm(f);
    if (n < 1e-12) throw std::invalid_argument("unit_normalized: zero-length feature");
    for (double& v : f) v /= n;
    return f;
}

// Deterministic orthonormal prototype set (Gaussian draws + Gram-Schmidt).
// Requires n_classes <= dim.
inline std::vector<Feature> make_prototypes(int n_classes, int dim, uint64_t seed) {
    if (n_classes > dim)
        throw std::invalid_argument("make_prototypes: more classes than dimensions");
    Rng rng(mix_seed(seed, hash_label("prototypes")));
    std::vector<Feature> protos;
    protos.reserve(static_cast<size_t>(n_classes));
    while (static_cast<int>(protos.size()) < n_classes) {
        Feature f(static_cast<size_t>(dim));
        for (double& v : f) v = rng.normal();
        for (const Feature& p : protos) {
            const double proj = dot(f, p);
            for (size_t i = 0; i < f.size(); ++i) f[i] -= proj * p[i];
        }
        if (feature_norm(f) < 1e-6) continue;  // rare degenerate draw, resample
        protos.push_back(unit_normalized(std::move(f)));
    }
    return protos;
}

struct TerrainClassModel {
    std::vector<std::string> class_names;   // known classes only
    std::vector<Feature> class_prototypes;  // unit-norm, one per known class
    double noise_sigma = 0.05;              // stand-in for data augmentations
    double softmax_temperature = 0.05;
    int K = 8;                              // stochastic forward inferences

    int n_classes() const { return static_cast<int>(class_prototypes.size()); }
    int feature_dim() const {
        return class_prototypes.empty() ? 0 : static_cast<int>(class_prototypes[0].size());
    }
};

struct TerrainPrediction {
    std::vector<double> probs;  // averaged class probabilities, sum to 1
    int label = 0;              // argmax class
    double entropy = 0.0;       // U in [0, ln n]
    double confidence = 0.0;    // C in [0, 1]
    Feature latent;             // unit-norm mean perturbed feature
};

struct ExperienceRecord {
    Vec2 location;       // world coordinates of the recorded patch
    double t_p = 0.0;    // recorded traversability in [0, 1]
    Feature latent;      // unit-norm
};

struct TerrainCorrectionConfig {
    double k_T3 = 15.0;
    double S_0 = 0.85;   // similarity sigmoid midpoint
    double k_T4 = 20.0;
    double C_0 = 0.9;    // confidence sigmoid midpoint
    double patch_size_m = 0.3;
    int buffer_capacity = 512;
    // Class name -> prior traversability cost. Defaults to the operator table
    // from the field deployment; the simulation profile replaces it with the
    // difficulty levels {0, 0.25, 0.5, 0.75, 1}.
    std::map<std::string, double> prior_costs = {
        {"Slab", 0.0}, {"Cement", 0.0}, {"Paved", 0.0}, {"Grass", 0.2},
        {"Brick", 0.6}, {"Bush", 0.7}, {"Gravel", 0.7}, {"Snow", 0.9},
    };
};

// C = 1 - U / ln(n_classes), clamped to [0, 1].
inline double confidence(double entropy, int n_classes) {
    if (n_classes < 2) throw std::invalid_argument("confidence: need at least 2 classes");
    return clamp01(1.0 - entropy / std::log(static_cast<double>(n_classes)));
}

// K stochastic inferences with fresh feature perturbations; probabilities are
// averaged before computing the label, the predictive entropy and the latent.
inline TerrainPrediction classify_patch(const Feature& observed, const TerrainClassModel& model,
                                        Rng& rng) {
    const int n = model.n_classes();
    const int dim = model.feature_dim();
    if (observed.empty() || static_cast<int>(observed.size()) != dim)
        throw std::invalid_argument("classify_patch: feature dimension mismatch");
    if (model.K < 1) throw std::invalid_argument("classify_patch: K must be >= 1");

    TerrainPrediction pred;
    pred.probs.assign(static_cast<size_t>(n), 0.0);
    Feature mean_pert(static_cast<size_t>(dim), 0.0);
    std::vector<double> scores(static_cast<size_t>(n));
    for (int k = 0; k < model.K; ++k) {
        Feature pert = observed;
        if (model.noise_sigma > 0.0)
            for (double& v : pert) v += rng.normal(0.0, model.noise_sigma);
        const double pn = feature_norm(pert);
        if (pn < 1e-12) throw std::invalid_argument("classify_patch: degenerate perturbation");
        for (int i = 0; i < n; ++i)
            scores[static_cast<size_t>(i)] =
                dot(pert, model.class_prototypes[static_cast<size_t>(i)]) / pn /
                model.softmax_temperature;
        const double m = *std::max_element(scores.begin(), scores.end());
        double z = 0.0;
        for (double s : scores) z += std::exp(s - m);
        for (int i = 0; i < n; ++i)
            pred.probs[static_cast<size_t>(i)] += std::exp(scores[static_cast<size_t>(i)] - m) / z;
        for (int i = 0; i < dim; ++i) mean_pert[static_cast<size_t>(i)] += pert[static_cast<size_t>(i)];
    }
    for (double& p : pred.probs) p /= model.K;

    pred.label = static_cast<int>(
        std::max_element(pred.probs.begin(), pred.probs.end()) - pred.probs.begin());
    double u = 0.0;
    for (double p : pred.probs)
        if (p > 0.0) u -= p * std::log(p);
    pred.entropy = u;
    pred.confidence = confidence(u, n);
    pred.latent = unit_normalized(std::move(mean_pert));
    return pred;
}

struct RetrievalResult {
    ExperienceRecord record;
    double similarity = 0.0;  // cosine similarity S
};

// Most similar experienced patch by cosine similarity; ties keep the earliest
// inserted record. Empty buffer -> nullopt (correction treated as absent).
inline std::optional<RetrievalResult> retrieve(const std::deque<ExperienceRecord>& buffer,
                                               const Feature& query_latent) {
    if (buffer.empty()) return std::nullopt;
    const Feature q = unit_normalized(query_latent);
    const ExperienceRecord* best = nullptr;
    double best_s = -2.0;
    for (const ExperienceRecord& r : buffer) {
        const double s = dot(q, r.latent);
        if (s > best_s) {
            best_s = s;
            best = &r;
        }
    }
    return RetrievalResult{*best, best_s};
}

// M_TP = T_P(x_r, y_r) / (1 + e^{-k_T3 (S - S_0)}): historical traversability
// gated by how similar the current observation looks to the recorded one.
inline double corrected_cost(double t_p_hist, double similarity,
                             const TerrainCorrectionConfig& cfg) {
    return t_p_hist / (1.0 + std::exp(-cfg.k_T3 * (similarity - cfg.S_0)));
}

// M_T = (M_TO - M_TP) / (1 + e^{-k_T4 (C - C_0)}) + M_TP: high confidence
// trusts the visual prior, low confidence falls back on proprioception.
inline double blended_cost(double m_to, double m_tp, double conf,
                           const TerrainCorrectionConfig& cfg) {
    return (m_to - m_tp) / (1.0 + std::exp(-cfg.k_T4 * (conf - cfg.C_0))) + m_tp;
}

// Append an experience record; a record within patch_size_m of the location
// is replaced in place, and the oldest record is evicted beyond capacity.
inline void update_experience(std::deque<ExperienceRecord>& buffer, const Vec2& location,
                              double t_p, const Feature& latent,
                              const TerrainCorrectionConfig& cfg) {
    if (t_p < 0.0 || t_p > 1.0)
        throw std::invalid_argument("update_experience: t_p outside [0,1]");
    ExperienceRecord rec{location, t_p, unit_normalized(latent)};
    for (ExperienceRecord& r : buffer) {
        if ((r.location - location).norm() < cfg.patch_size_m) {
            r = std::move(rec);
            return;
        }
    }
    buffer.push_back(std::move(rec));
    while (static_cast<int>(buffer.size()) > cfg.buffer_capacity) buffer.pop_front();
}

// World-aligned patch tile containing a point.
struct PatchId {
    int ix = 0;
    int iy = 0;
    bool operator<(const PatchId& o) const {
        return ix != o.ix ? ix < o.ix : iy < o.iy;
    }
    bool operator==(const PatchId& o) const { return ix == o.ix && iy == o.iy; }
};

inline PatchId patch_of(const Vec2& p, double patch_size_m) {
    return PatchId{static_cast<int>(std::floor(p.x / patch_size_m)),
                   static_cast<int>(std::floor(p.y / patch_size_m))};
}

inline Vec2 patch_center(const PatchId& id, double patch_size_m) {
    return Vec2{(id.ix + 0.5) * patch_size_m, (id.iy + 0.5) * patch_size_m};
}

// Per-episode terrain estimator: classifier model, experience buffer and a
// per-patch cache of the latest prediction. The cache serves two purposes:
// a patch classified while ahead of the robot can be recorded into the
// experience buffer once the robot stands on it, and window cells whose
// patch is momentarily outside the camera cone keep their last observed
// cost instead of reading as free ground.
class TerrainEstimator {
public:
    TerrainEstimator() = default;
    TerrainEstimator(TerrainClassModel model, TerrainCorrectionConfig cfg,
                     bool use_online_correction = true)
        : model_(std::move(model)), cfg_(std::move(cfg)), use_correction_(use_online_correction) {
        for (const std::string& name : model_.class_names) {
            const auto it = cfg_.prior_costs.find(name);
            if (it == cfg_.prior_costs.end())
                throw std::invalid_argument("TerrainEstimator: no prior cost for class " + name);
            prior_by_class_.push_back(it->second);
        }
    }

    const TerrainClassModel& model() const { return model_; }
    const TerrainCorrectionConfig& config() const { return cfg_; }
    const std::deque<ExperienceRecord>& buffer() const { return buffer_; }

    double prior_cost(int label) const { return prior_by_class_.at(static_cast<size_t>(label)); }

    // Build the M_T layer. sense returns the observed feature for a patch
    // center in world coordinates, or nullopt when the patch is not covered
    // by the current observation. Covered patches are re-classified fresh;
    // uncovered ones fall back on the cached prediction, or stay unknown
    // when the patch was never seen. A cell takes the worst cost among the
    // patches its area overlaps, so paths cannot hug a patch boundary with
    // zero margin.
    CostGrid terrain_cost_map(const Pose& robot, const GridSpec& spec,
                              const std::function<std::optional<Feature>(const Vec2&)>& sense,
                              Rng& rng) {
        CostGrid g(spec);
        // Patches overlapped by each cell (probed at the cell corners).
        std::map<PatchId, std::vector<Cell>> patches;
        const double half = 0.5 * spec.resolution_m - 1e-9;
        for (int x = 0; x < spec.width_cells; ++x)
            for (int y = 0; y < spec.height_cells; ++y) {
                const Cell c{x, y};
                const Vec2 center = cell_to_world(c, robot, spec);
                PatchId seen[4];
                int n_seen = 0;
                for (const double sx : {-half, half})
                    for (const double sy : {-half, half}) {
                        const PatchId pid =
                            patch_of(Vec2{center.x + sx, center.y + sy}, cfg_.patch_size_m);
                        bool dup = false;
                        for (int k = 0; k < n_seen; ++k) dup = dup || seen[k] == pid;
                        if (!dup) {
                            seen[n_seen++] = pid;
                            patches[pid].push_back(c);
                        }
                    }
            }
        for (const auto& [pid, cells] : patches) {
            const TerrainPrediction* pred = nullptr;
            if (const auto feature = sense(patch_center(pid, cfg_.patch_size_m))) {
                cache_[pid] = classify_patch(*feature, model_, rng);
                pred = &cache_[pid];
            } else if (const auto it = cache_.find(pid); it != cache_.end()) {
                pred = &it->second;
            }
            if (!pred) continue;
            const double m_to = prior_cost(pred->label);
            double m_tp = 0.0;
            if (use_correction_) {
                if (const auto hit = retrieve(buffer_, pred->latent))
                    m_tp = corrected_cost(hit->record.t_p, hit->similarity, cfg_);
            }
            const double m_t = blended_cost(m_to, m_tp, pred->confidence, cfg_);
            for (const Cell& c : cells) g.at(c) = std::max(g.at(c), m_t);
        }
        return g;
    }

    // Record a 1 s traversability summary at the robot location, keyed by the
    // latent last observed for the patch the robot stands on. Returns false
    // when that patch was never classified (nothing to associate).
    bool record_experience(const Vec2& robot_position, double t_p) {
        if (!use_correction_) return false;
        const auto it = cache_.find(patch_of(robot_position, cfg_.patch_size_m));
        if (it == cache_.end()) return false;
        update_experience(buffer_, robot_position, t_p, it->second.latent, cfg_);
        return true;
    }

private:
    TerrainClassModel model_;
    TerrainCorrectionConfig cfg_;
    bool use_correction_ = true;
    std::vector<double> prior_by_class_;
    std::deque<ExperienceRecord> buffer_;
    std::map<PatchId, TerrainPrediction> cache_;
};

}  // namespace topnav
