#pragma once

#include "bctx/forecast.hpp"
#include "bctx/selection.hpp"
#include "bctx/sequential_model.hpp"
#include "bctx/simulate.hpp"
#include "bctx/tree_model.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bctx {

/// Everything needed to describe a fitted model and to refit it on the same
/// data: configuration, data split and the MAP tree with per-leaf parameters.
struct ModelDocument {
    static constexpr int kSchemaVersion = 1;

    /// beta and warmup are always set explicitly.
    FitConfig config;
    /// Length of the (transformed) series and the first held-out index.
    std::size_t series_length = 0;
    std::size_t train_end = 0;
    std::string transform = "none";
    std::uint64_t seed = 0;
    TreeModel tree;
    std::vector<LeafSummary> leaves;
    double log_evidence = 0.0;
    double map_posterior = 0.0;
    std::size_t observations = 0;

    [[nodiscard]] static ModelDocument from_model(const SequentialModel& model);

    /// Canonical JSON; parse() followed by to_json() reproduces it exactly.
    [[nodiscard]] std::string to_json() const;
    [[nodiscard]] static ModelDocument parse(std::string_view json);
};

[[nodiscard]] std::string report_to_json(const EvalReport& report, std::uint64_t seed,
                                         const std::optional<SelectionResult>& selection = {});
/// time,mean,variance,realised,sq_error,log_density
void write_records_csv(std::ostream& out, const std::vector<ForecastRecord>& records);

/// thresholds,order,log_evidence,neg_log2_evidence,status
void write_selection_csv(std::ostream& out, const SelectionResult& result);

[[nodiscard]] std::string spec_to_json(const GenerativeSpec& spec);
[[nodiscard]] GenerativeSpec spec_from_json(std::string_view json);

}  // namespace bctx
