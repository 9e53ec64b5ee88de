#pragma once

// JSON and CSV encodings of library objects. Complex numbers are [re, im]
// pairs; matrices are row lists.

#include "qfound/algebra.hpp"
#include "qfound/context.hpp"
#include "qfound/elementary_state.hpp"
#include "qfound/ensemble.hpp"
#include "qfound/measurement.hpp"
#include "qfound/oscillator.hpp"

#include <json.hpp>

#include <iosfwd>
#include <span>
#include <vector>

namespace qfound {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

Json complex_to_json(Complex z);
Complex complex_from_json(const Json& j);

Json matrix_to_json(const Matrix& m);
/// Throws InvalidArgument on ragged or malformed input.
Matrix matrix_from_json(const Json& j);

/// {"dimension", "block_sizes", "matrix"}.
Json element_to_json(const AlgebraElement& a);
AlgebraElement element_from_json(const Json& j);

Json context_to_json(const Context& ctx);
/// Layers as (context, index) pairs, stable fingerprints, and whether
/// stability was reset by attaching a quantum state.
Json state_to_json(const ElementaryState& phi);
Json record_to_json(const MeasurementRecord& rec);
Json transcript_to_json(std::span<const MeasurementRecord> records);
Json ensemble_to_json(const EnsembleReport& rep);
Json consistency_to_json(const ConsistencyReport& rep);

/// Header "context,observable,n,empirical_mean,exact_mean,standard_error,spectrum_point,count";
/// one row per spectrum point.
void write_ensemble_csv(std::ostream& out, std::span<const EnsembleReport> reports);

struct GreenRow {
  std::vector<double> times;
  Complex value;
};

/// Rows "t_1,...,t_n,re,im"; the header names the columns.
void write_green_csv(std::ostream& out, std::span<const GreenRow> rows);

/// Reads "t,j" rows on a uniform grid ('#' comments, optional header).
/// Throws InvalidArgument for non-uniform or too short input.
SourceFunction read_source_csv(std::istream& in);
void write_source_csv(std::ostream& out, const SourceFunction& j);

}  // namespace qfound
