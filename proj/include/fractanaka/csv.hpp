#pragma once

#include <cstddef>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "fractanaka/fbm.hpp"
#include "fractanaka/malliavin.hpp"
#include "fractanaka/mc.hpp"
#include "fractanaka/tanaka.hpp"

namespace fractanaka {

/// Shortest-form-independent rendering: 17 significant digits, '.' decimal
/// separator regardless of locale.
std::string format_double(double v);

/// Header `t,path_0,...,path_{k-1}`, one row per node.
void write_paths_csv(std::ostream& out, const TimeGrid& grid, std::span<const std::vector<double>> paths);
void write_paths_csv(std::ostream& out, std::span<const FbmPath> paths);

/// Header `r_index,s_index,value`, entries with r <= s.
void write_field_csv(std::ostream& out, const DerivativeField& d);

void write_terms_header(std::ostream& out);
void write_terms_row(std::ostream& out, std::size_t path_id, const TanakaTerms& t);
/// All per-path rows of an ensemble run with keep_rows, same schema.
void write_terms_csv(std::ostream& out, const EnsembleResult& result, Convention convention);

/// Header `level,n,term,mean,stderr,count`.
void write_ensemble_csv(std::ostream& out, const EnsembleResult& result);

}  // namespace fractanaka
