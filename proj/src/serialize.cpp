#include "qfound/serialize.hpp"

#include "qfound/errors.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace qfound {

Json complex_to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

Complex complex_from_json(const Json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2) throw InvalidArgument("complex number must be [re, im]");
  return {j[0].get<double>(), j[1].get<double>()};
}

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(complex_to_json(m(i, k)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) throw InvalidArgument("matrix must be a nonempty list of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw InvalidArgument("matrix rows have different lengths");
    }
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = complex_from_json(row[static_cast<std::size_t>(k)]);
  }
  return m;
}

Json element_to_json(const AlgebraElement& a) {
  return Json{{"dimension", a.dimension()},
              {"block_sizes", a.algebra()->block_sizes()},
              {"matrix", matrix_to_json(a.matrix())}};
}

AlgebraElement element_from_json(const Json& j) {
  const Matrix m = matrix_from_json(j.at("matrix"));
  std::vector<std::size_t> blocks;
  if (j.contains("block_sizes")) {
    blocks = j.at("block_sizes").get<std::vector<std::size_t>>();
  } else {
    blocks = {static_cast<std::size_t>(m.rows())};
  }
  auto algebra = make_algebra(blocks);
  if (j.contains("dimension") && j.at("dimension").get<std::size_t>() != algebra->dimension()) {
    throw DimensionMismatch("declared dimension disagrees with block sizes");
  }
  return AlgebraElement(algebra, m);
}

Json context_to_json(const Context& ctx) {
  return Json{{"id", ctx.id},
              {"block_sizes", ctx.algebra->block_sizes()},
              {"generator_values", ctx.generator_values},
              {"basis", matrix_to_json(ctx.basis)},
              {"fingerprint", matrix_to_json(ctx.fingerprint.cast<Complex>())}};
}

Json state_to_json(const ElementaryState& phi) {
  Json layers = Json::array();
  for (const auto& [id, layer] : phi.layers()) layers.push_back({{"context", id}, {"index", layer.index}});
  Json contexts = Json::array();
  for (const auto& [id, layer] : phi.stable_contexts()) {
    contexts.push_back({{"context", id}, {"index", layer.index}});
  }
  return Json{{"layers", layers},
              {"stable", phi.stable_fingerprints()},
              {"stable_contexts", contexts},
              {"quantum_state_attached", phi.quantum_state().has_value()},
              {"stability_reset_on_attach", phi.stability_reset()}};
}

Json record_to_json(const MeasurementRecord& rec) {
  return Json{{"step", rec.step},         {"instrument", rec.instrument}, {"label", rec.label},
              {"observable", rec.observable}, {"value", rec.value},       {"post_stable", rec.post_stable}};
}

Json transcript_to_json(std::span<const MeasurementRecord> records) {
  Json out = Json::array();
  for (const auto& r : records) out.push_back(record_to_json(r));
  return out;
}

Json ensemble_to_json(const EnsembleReport& rep) {
  Json hist = Json::array();
  for (std::size_t b = 0; b < rep.spectrum.size(); ++b) {
    hist.push_back({{"value", rep.spectrum[b]}, {"count", rep.histogram[b]}});
  }
  return Json{{"observable", rep.observable},
              {"context", rep.context},
              {"sample_count", rep.sample_count},
              {"empirical_mean", rep.empirical_mean},
              {"exact_mean", rep.exact_mean},
              {"standard_error", rep.standard_error},
              {"histogram", hist}};
}

Json consistency_to_json(const ConsistencyReport& rep) {
  return Json{{"sample_count", rep.sample_count},
              {"thresholds", rep.thresholds},
              {"exact_cdf_1", rep.exact_cdf_1},
              {"exact_cdf_2", rep.exact_cdf_2},
              {"empirical_cdf_1", rep.empirical_cdf_1},
              {"empirical_cdf_2", rep.empirical_cdf_2},
              {"pooled_standard_error", rep.pooled_standard_error},
              {"max_exact_gap", rep.max_exact_gap},
              {"max_standard_score", rep.max_standard_score},
              {"passed", rep.passed()}};
}

namespace {

std::ostream& full_precision(std::ostream& out) { return out << std::setprecision(17); }

}  // namespace

void write_ensemble_csv(std::ostream& out, std::span<const EnsembleReport> reports) {
  full_precision(out);
  out << "context,observable,n,empirical_mean,exact_mean,standard_error,spectrum_point,count\n";
  for (const auto& r : reports) {
    for (std::size_t b = 0; b < r.spectrum.size(); ++b) {
      out << r.context << ',' << r.observable << ',' << r.sample_count << ',' << r.empirical_mean << ','
          << r.exact_mean << ',' << r.standard_error << ',' << r.spectrum[b] << ',' << r.histogram[b] << '\n';
    }
  }
}

void write_green_csv(std::ostream& out, std::span<const GreenRow> rows) {
  full_precision(out);
  const std::size_t n = rows.empty() ? 0 : rows.front().times.size();
  for (std::size_t k = 0; k < n; ++k) out << 't' << (k + 1) << ',';
  out << "re,im\n";
  for (const auto& r : rows) {
    if (r.times.size() != n) throw InvalidArgument("Green rows of different order");
    for (double t : r.times) out << t << ',';
    out << r.value.real() << ',' << r.value.imag() << '\n';
  }
}

SourceFunction read_source_csv(std::istream& in) {
  std::vector<double> ts;
  std::vector<double> js;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream fields(line);
    double t = 0.0;
    double j = 0.0;
    if (!(fields >> t >> j)) {
      if (ts.empty() && line.find_first_of("0123456789") == std::string::npos) continue;  // header
      throw InvalidArgument("source line " + std::to_string(line_no) + ": expected t,j");
    }
    ts.push_back(t);
    js.push_back(j);
  }
  if (ts.size() < 2) throw InvalidArgument("source needs at least two samples");
  TimeGrid grid{ts.front(), ts.back(), ts.size()};
  grid.validate();
  for (std::size_t k = 0; k < ts.size(); ++k) {
    if (std::abs(ts[k] - grid.time(k)) > 1e-9 * std::max(1.0, grid.step())) {
      throw InvalidArgument("source times are not a uniform grid at sample " + std::to_string(k));
    }
  }
  return SourceFunction{grid, js};
}

void write_source_csv(std::ostream& out, const SourceFunction& j) {
  full_precision(out);
  out << "t,j\n";
  for (std::size_t k = 0; k < j.samples.size(); ++k) out << j.grid.time(k) << ',' << j.samples[k] << '\n';
}

}  // namespace qfound
