#ifndef BNEM_DATAIO_HPP
#define BNEM_DATAIO_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bnem/bounds.hpp"
#include "bnem/dataset.hpp"
#include "bnem/em.hpp"
#include "bnem/model.hpp"

namespace bnem {

// File formats. All files are UTF-8 text; '#' starts a comment line (in
// CSV files only above the header); labels are restricted to
// [A-Za-z0-9_+-]; the missing token is "?"; probabilities serialize with
// 17 significant digits so parse(serialize(x)) is exact.
//
// Network file, one directive per line:
//   node <name> [parents <p1> <p2> ...] states <s1> <s2> ...
//   cpt <name>            followed by q_i rows of r_i probabilities,
//                         rows ordered by parent configuration
// Bounds file: "min <name>" and "max <name>" blocks shaped like cpt blocks.
// Dataset file: CSV, header of node names, cells are state labels or "?".

struct ParsedNetwork {
  NetworkStructure structure;
  std::optional<ParameterSet> params;
};

/// Throws a parse Error (with line number) on malformed input, unknown
/// parent names, structural violations, wrong row shapes, or CPT rows
/// whose sum deviates from one by more than 1e-6. Rows deviating by at
/// most 1e-6 are renormalized.
ParsedNetwork parse_network(std::string_view text);

std::string serialize_network(const NetworkStructure& structure,
                              const ParameterSet* params = nullptr,
                              std::span<const std::string> comments = {});

Dataset parse_dataset(std::string_view text,
                      const NetworkStructure& structure);

std::string serialize_dataset(const NetworkStructure& structure,
                              const Dataset& dataset,
                              std::span<const std::string> comments = {});

ParameterBounds parse_bounds(std::string_view text,
                             const NetworkStructure& structure);

std::string serialize_bounds(const NetworkStructure& structure,
                             const ParameterBounds& bounds,
                             std::span<const std::string> comments = {});

/// Trace CSV: iteration,observed_loglik,expected_loglik,max_param_delta,
/// clip_count,post_norm_violations,skipped_records.
std::string serialize_trace(std::span<const TraceRow> trace);

/// n complete records drawn ancestrally in topological order; record l
/// uses splitmix64 stream (seed, l).
Dataset forward_sample(const NetworkStructure& structure,
                       const ParameterSet& params, int n, std::uint64_t seed);

/// Each cell independently replaced by Missing with the given probability;
/// record l uses splitmix64 stream (seed, l). Observed values are never
/// altered.
Dataset mask_mcar(const Dataset& dataset, double rate, std::uint64_t seed);

/// Missing cells / total cells; 0 for an empty dataset.
double missingness_rate(const Dataset& dataset);

std::string read_file(const std::string& path);

/// Write-then-rename so readers never observe a partial file.
void write_file_atomic(const std::string& path, std::string_view content);

/// %.17g rendering used by every serializer.
std::string format_double(double value);

}  // namespace bnem

#endif  // BNEM_DATAIO_HPP
