#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "lorma/inflation.hpp"
#include "lorma/matrix.hpp"

namespace lorma {

enum class AdapterVariant { lora, lorma_naive, lorma_pi, lorma_plus };
enum class MultiplySide { pre, post };

const char* to_string(AdapterVariant v);
const char* to_string(MultiplySide s);
AdapterVariant parse_variant(const std::string& s);
MultiplySide parse_side(const std::string& s);

/// Which inflation the variant applies to the low-rank product.
InflationKind inflation_of(AdapterVariant v);

struct AdapterConfig {
    AdapterVariant variant = AdapterVariant::lora;
    MultiplySide side = MultiplySide::pre;
    int r = 4;
    double alpha = 4.0;
    std::uint64_t seed = 0;

    double scaling() const { return alpha / static_cast<double>(r); }
};

/// A frozen base weight w0 (d x k) plus trainable low-rank factors.
/// Factor shapes: lora b: d x r, a: r x k; multiplicative pre b: d x r,
/// a: r x d; multiplicative post b: k x r, a: r x k.
struct AdapterState {
    Matrix w0;
    Matrix b;
    Matrix a;
    AdapterConfig config;
};

/// Variant-specific initialization. lora, lorma_pi and lorma_plus start as
/// the exact identity adaptation (forward == w0 x); lorma_naive has no
/// identity-preserving init and starts from small Gaussian factors.
AdapterState init_adapter(const Matrix& w0, const AdapterConfig& config);

/// Batched forward pass, x is k x b. The multiplication order is part of
/// the contract (it fixes the complexity accounting):
///   lora:            w0 x + s*(B (A x))
///   lorma_naive pre: B (A (w0 x))                post: w0 (B (A x))
///   lorma_plus pre:  w0 x + s*(B (A (w0 x)))     post: w0 x + s*(w0 (B (A x)))
///   lorma_pi pre:    I_pi(s*BA) (w0 x)           post: w0 (I_pi(s*BA) x)
/// A non-null counter tallies products and elementwise work.
Matrix forward(const AdapterState& state, const Matrix& x, FlopCounter* counter = nullptr);

/// The single merged weight equal to the adapter's transformation.
Matrix effective_weight(const AdapterState& state);

/// effective_weight(state) - w0.
Matrix delta_w(const AdapterState& state);

/// The square multiplier I(s*BA) for multiplicative variants (d x d pre,
/// k x k post); for lora, the additive update s*BA.
Matrix adapter_transform(const AdapterState& state);

struct MergeResult {
    Matrix weights;
    /// Whether the multiplier is numerically full rank, i.e. whether the
    /// original weights could be recovered without a stored copy. Always
    /// true for lora (recovery by subtraction).
    bool multiplier_invertible;
};

MergeResult merge(const AdapterState& state);

/// Snapshot files <stem>.w0.lrma / .b.lrma / .a.lrma plus a <stem>.json
/// sidecar carrying {variant, side, r, alpha, seed}.
void save_adapter(const AdapterState& state, const std::filesystem::path& dir,
                  const std::string& stem);
AdapterState load_adapter(const std::filesystem::path& dir, const std::string& stem);

}  // namespace lorma
