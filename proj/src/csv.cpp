#include "fractanaka/csv.hpp"

#include <array>
#include <charconv>

#include "fractanaka/errors.hpp"

namespace fractanaka {

std::string format_double(double v) {
    std::array<char, 40> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
    if (ec != std::errc()) throw NumericalError("could not format a double");
    return std::string(buf.data(), end);
}

void write_paths_csv(std::ostream& out, const TimeGrid& grid, std::span<const std::vector<double>> paths) {
    out << 't';
    for (std::size_t k = 0; k < paths.size(); ++k) {
        if (paths[k].size() != grid.nodes()) throw DomainError("write_paths_csv: path length mismatch");
        out << ",path_" << k;
    }
    out << '\n';
    for (std::size_t i = 0; i < grid.nodes(); ++i) {
        out << format_double(grid.node(i));
        for (const auto& p : paths) out << ',' << format_double(p[i]);
        out << '\n';
    }
}

void write_paths_csv(std::ostream& out, std::span<const FbmPath> paths) {
    if (paths.empty()) throw DomainError("write_paths_csv: no paths");
    std::vector<std::vector<double>> v;
    v.reserve(paths.size());
    for (const auto& p : paths) v.push_back(p.values);
    write_paths_csv(out, paths.front().grid, v);
}

void write_field_csv(std::ostream& out, const DerivativeField& d) {
    out << "r_index,s_index,value\n";
    const std::size_t n = d.grid().nodes();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) out << i << ',' << j << ',' << format_double(d(i, j)) << '\n';
    }
}

void write_terms_header(std::ostream& out) {
    out << "path_id,x,n,convention,abs_increment,drift,rs_total,trace_sigma_prime,trace_local,skorokhod,"
           "residual_tchange,residual_tf\n";
}

void write_terms_row(std::ostream& out, std::size_t path_id, const TanakaTerms& t) {
    out << path_id << ',' << format_double(t.level.x) << ',' << t.n.value() << ',' << to_string(t.convention) << ','
        << format_double(t.abs_increment) << ',' << format_double(t.drift) << ',' << format_double(t.rs_total) << ','
        << format_double(t.trace_sigma_prime) << ',' << format_double(t.trace_local) << ','
        << format_double(t.skorokhod) << ',' << format_double(mollified_identity_residual(t)) << ','
        << format_double(tanaka_residual(t)) << '\n';
}

void write_terms_csv(std::ostream& out, const EnsembleResult& result, Convention convention) {
    constexpr std::array<Term, 8> columns{Term::abs_increment,     Term::drift,       Term::rs_total,
                                          Term::trace_sigma_prime, Term::trace_local, Term::skorokhod,
                                          Term::residual_tchange,  Term::residual_tf};
    write_terms_header(out);
    for (std::size_t l = 0; l < result.levels().size(); ++l) {
        for (std::size_t k = 0; k < result.ladder().size(); ++k) {
            std::array<std::span<const double>, columns.size()> cols;
            for (std::size_t c = 0; c < columns.size(); ++c) cols[c] = result.samples(l, k, columns[c]);
            for (std::size_t p = 0; p < result.paths(); ++p) {
                out << p << ',' << format_double(result.levels()[l]) << ',' << result.ladder()[k].value() << ','
                    << to_string(convention);
                for (const auto& col : cols) out << ',' << format_double(col[p]);
                out << '\n';
            }
        }
    }
}

void write_ensemble_csv(std::ostream& out, const EnsembleResult& result) {
    out << "level,n,term,mean,stderr,count\n";
    for (std::size_t l = 0; l < result.levels().size(); ++l) {
        for (std::size_t k = 0; k < result.ladder().size(); ++k) {
            for (std::size_t term = 0; term < kTermCount; ++term) {
                const MCEstimate& e = result.at(l, k, static_cast<Term>(term));
                out << format_double(result.levels()[l]) << ',' << result.ladder()[k].value() << ','
                    << to_string(static_cast<Term>(term)) << ',' << format_double(e.mean) << ','
                    << format_double(e.std_error) << ',' << e.count << '\n';
            }
        }
    }
}

}  // namespace fractanaka
