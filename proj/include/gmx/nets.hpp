#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "gmx/distribution.hpp"
#include "gmx/risk.hpp"

namespace gmx::nets {

// Plug-in estimators wired into network architectures as knowledge inputs.
// plugin_mm: maximum-likelihood entropy with the Miller-Madow bias term.
// chao_new_categories: Chao-type unseen-mass extrapolation.
// smoothed_gt_new_categories: Good-Toulmin with binomial tail smoothing
// when the future sample exceeds the observed one.
enum class BaselineKind {
    sample_mean,
    plugin_mm,
    chao_new_categories,
    smoothed_gt_new_categories,
};

BaselineKind baseline_from_name(const std::string& name);
std::string baseline_name(BaselineKind kind);
double baseline(BaselineKind kind, const core::Observation& x, int n, int m);

// How an ELM reads an observation.
enum class ElmInput { real_sample, fingerprint };

// Estimator family descriptor. ReLU activations everywhere, identity at the
// output node. The flat coefficient layout is layer-major and row-major
// within a layer; layout() documents the slices.
class Architecture {
public:
    enum class Family { affine_mean, skn, deepset_skn, elm };

    static Architecture affine_mean();

    // Fingerprint-input network with `baselines` wired into the first and
    // second hidden layers and directly into the output node. At
    // initialization the output reproduces sum_b init_weight[b]*baseline_b.
    static Architecture skn(int n, int m, std::vector<BaselineKind> baselines,
                            std::vector<double> init_weights, int hidden = 50);

    // Permutation-invariant deep set over a real sample of size n with a
    // sample-mean augmentation node; initialized to the sample mean exactly.
    static Architecture deepset_skn(int n, int phi1 = 10, int phi2 = 5, int rho1 = 10);

    // Extreme learning machine: frozen random hidden layer (reproducible
    // from frozen_seed), trainable affine output. beta holds only the
    // trainable output slice.
    static Architecture elm(ElmInput input, int input_dim, int hidden, std::uint64_t frozen_seed,
                            int n = 0, int m = 0);

    Family family() const { return family_; }
    std::size_t param_count() const;
    std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>> layout() const;

    int sample_size() const { return n_; }
    int future_size() const { return m_; }
    int hidden() const { return hidden_; }
    int phi1() const { return phi1_; }
    int phi2() const { return phi2_; }
    int rho1() const { return rho1_; }
    int input_dim() const { return input_dim_; }
    ElmInput elm_input() const { return elm_input_; }
    std::uint64_t frozen_seed() const { return frozen_seed_; }
    const std::vector<BaselineKind>& baselines() const { return baselines_; }
    const std::vector<double>& init_baseline_weights() const { return init_weights_; }
    const std::vector<double>& frozen_weights() const;  // elm only: W then bias

    bool operator==(const Architecture& other) const;
    bool operator!=(const Architecture& other) const { return !(*this == other); }

private:
    Family family_ = Family::affine_mean;
    int n_ = 0, m_ = 0;
    int hidden_ = 0;
    int phi1_ = 0, phi2_ = 0, rho1_ = 0;
    int input_dim_ = 0;
    ElmInput elm_input_ = ElmInput::real_sample;
    std::uint64_t frozen_seed_ = 0;
    std::vector<BaselineKind> baselines_;
    std::vector<double> init_weights_;
    std::shared_ptr<const std::vector<double>> frozen_;
};

struct EstimatorParams {
    Architecture arch;
    std::vector<double> beta;
    std::uint64_t init_seed = 0;
};

// Paper-style initialization: non-baseline weights uniform on
// +-1/sqrt(fan-in) from `seed`, zero biases, output layer wired so the
// network reproduces its designated baseline combination exactly.
EstimatorParams initialize(const Architecture& arch, std::uint64_t seed);

double forward(const EstimatorParams& d, const core::Observation& x);

// Exact reverse-mode gradient of (forward(d,x) - target)^2 with respect to
// beta. For an ELM this is the gradient over the trainable output slice
// (the frozen hidden layer is a constant of the architecture).
std::vector<double> grad_loss(const EstimatorParams& d, const core::Observation& x, double target);

struct MixtureEstimator {
    std::vector<std::pair<EstimatorParams, double>> members;

    void validate() const;  // weights >= 0, sum 1 within 1e-12, one architecture
};

// Coefficientwise average; only valid for families whose estimator is affine
// in beta (affine_mean, elm), where it equals the average estimator.
EstimatorParams average_mixture(const MixtureEstimator& mix);

risk::EstimatorFn make_evaluator(EstimatorParams d);

}  // namespace gmx::nets
