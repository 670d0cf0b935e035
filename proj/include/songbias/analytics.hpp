#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "songbias/errors.hpp"
#include "songbias/records.hpp"

namespace songbias {

enum class ChartSubset { all, billboard, billboard_top10 };

inline const char* to_string(ChartSubset s) {
    switch (s) {
        case ChartSubset::all: return "all";
        case ChartSubset::billboard: return "billboard";
        default: return "billboard_top10";
    }
}

struct GroupKey {
    ArtistType artist_type = ArtistType::solo;
    Gender gender = Gender::male;
    std::optional<std::string> genre_top;
    ChartSubset subset = ChartSubset::all;

    auto tie() const { return std::tuple(artist_type, gender, genre_top, subset); }
    bool operator<(const GroupKey& o) const { return tie() < o.tie(); }
    bool operator==(const GroupKey& o) const { return tie() == o.tie(); }
};

inline std::string to_string(const GroupKey& k) {
    std::string s = std::string(to_string(k.artist_type)) + "/" + to_string(k.gender);
    if (k.genre_top) s += "/" + *k.genre_top;
    s += "/" + std::string(to_string(k.subset));
    return s;
}

struct FractionRow {
    GroupKey key;
    long long numerator = 0;    // labeled songs in the group
    long long denominator = 0;  // all songs in the group
    std::optional<double> fraction;
};

struct FractionTable {
    std::vector<FractionRow> rows;  // sorted by key
    std::map<ChartSubset, std::pair<long long, long long>> totals;  // num/den per subset
};

// Per-(artist type, gender[, genre], subset) counts and fractions of labeled
// songs. Songs without a genre are skipped by the by_genre variant. Keys
// listed in request_keys appear in the output even with a zero denominator
// (fraction absent).
inline FractionTable fraction_table(const Corpus& corpus,
                                    const std::map<std::string, bool>& labels,
                                    const std::map<std::string, std::vector<ChartSubset>>& subsets,
                                    bool by_genre = false,
                                    const std::vector<GroupKey>& request_keys = {}) {
    std::map<GroupKey, std::pair<long long, long long>> acc;
    for (const auto& k : request_keys) acc[k];
    FractionTable out;
    for (const auto& r : corpus) {
        const bool labeled = [&] {
            auto it = labels.find(r.song_id);
            return it != labels.end() && it->second;
        }();
        std::vector<ChartSubset> in = {ChartSubset::all};
        if (auto it = subsets.find(r.song_id); it != subsets.end())
            in.insert(in.end(), it->second.begin(), it->second.end());
        for (ChartSubset sub : in) {
            GroupKey key{r.artist_type, r.gender, std::nullopt, sub};
            if (by_genre) {
                if (!r.genre_top) continue;
                key.genre_top = r.genre_top;
            }
            auto& [num, den] = acc[key];
            ++den;
            if (labeled) ++num;
            auto& [tn, td] = out.totals[sub];
            if (!by_genre) {
                ++td;
                if (labeled) ++tn;
            }
        }
    }
    for (const auto& [key, nd] : acc) {
        FractionRow row;
        row.key = key;
        row.numerator = nd.first;
        row.denominator = nd.second;
        if (nd.second > 0)
            row.fraction = static_cast<double>(nd.first) / static_cast<double>(nd.second);
        out.rows.push_back(std::move(row));
    }
    return out;
}

// ---- series -----------------------------------------------------------------

struct SeriesPoint {
    int year = 0;
    double value = 0.0;
};

// Centered median over values whose year falls within ±(window-1)/2 of each
// point's year; the window shrinks at the series edges. Window must be odd.
inline std::vector<SeriesPoint> median_filter(const std::vector<SeriesPoint>& series,
                                              int window = 5) {
    if (window < 1 || window % 2 == 0) throw ConfigError("median filter window must be odd");
    const int half = (window - 1) / 2;
    std::vector<SeriesPoint> sorted = series;
    std::sort(sorted.begin(), sorted.end(),
              [](const SeriesPoint& a, const SeriesPoint& b) { return a.year < b.year; });
    std::vector<SeriesPoint> out;
    out.reserve(sorted.size());
    for (const auto& center : sorted) {
        std::vector<double> vals;
        for (const auto& p : sorted)
            if (std::abs(p.year - center.year) <= half) vals.push_back(p.value);
        std::sort(vals.begin(), vals.end());
        const std::size_t n = vals.size();
        const double med = n % 2 == 1 ? vals[n / 2] : 0.5 * (vals[n / 2 - 1] + vals[n / 2]);
        out.push_back({center.year, med});
    }
    return out;
}

struct CiPoint {
    int year = 0;
    double value = 0.0;  // windowed median of the raw yearly fractions
    double ci_low = 0.0;
    double ci_high = 0.0;
};

namespace detail {

inline double percentile(std::vector<double> xs, double q) {  // q in [0,1], linear interp
    std::sort(xs.begin(), xs.end());
    if (xs.size() == 1) return xs[0];
    const double pos = q * static_cast<double>(xs.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, xs.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return xs[lo] * (1.0 - frac) + xs[hi] * frac;
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t x = seed ^ (salt * 0x9E3779B97F4A7C15ULL + 0x2545F4914F6CDD1DULL);
    x ^= x >> 33;
    x *= 0xFF51AFD7ED558CCDULL;
    x ^= x >> 33;
    return x;
}

}  // namespace detail

// Percentile bootstrap around the windowed median: per center year, pool the
// song-level indicators of the window years, resample the pool with
// replacement, recompute the median of the resampled yearly fractions, and
// take the level-% percentile band. Deterministic per (rng_seed, year).
inline std::vector<CiPoint> bootstrap_ci(const std::map<int, std::vector<int>>& samples,
                                         int n_boot = 1000, double level = 95.0, int window = 5,
                                         std::uint64_t rng_seed = 0) {
    if (window < 1 || window % 2 == 0) throw ConfigError("bootstrap window must be odd");
    if (n_boot < 1) throw ConfigError("n_boot < 1");
    if (!(level > 0.0 && level < 100.0)) throw ConfigError("ci level outside (0,100)");
    const int half = (window - 1) / 2;
    const double alpha = (100.0 - level) / 200.0;

    std::vector<CiPoint> out;
    for (const auto& [year, _] : samples) {
        std::vector<std::pair<int, int>> pool;  // (year, indicator)
        std::vector<SeriesPoint> raw;
        for (const auto& [y, xs] : samples) {
            if (std::abs(y - year) > half || xs.empty()) continue;
            long long sum = 0;
            for (int v : xs) {
                pool.emplace_back(y, v);
                sum += v;
            }
            raw.push_back({y, static_cast<double>(sum) / static_cast<double>(xs.size())});
        }
        if (pool.empty()) continue;

        std::vector<double> fr;
        for (const auto& p : raw) fr.push_back(p.value);
        std::sort(fr.begin(), fr.end());
        const double value = fr.size() % 2 == 1
                                 ? fr[fr.size() / 2]
                                 : 0.5 * (fr[fr.size() / 2 - 1] + fr[fr.size() / 2]);

        std::mt19937_64 rng(detail::mix_seed(rng_seed, static_cast<std::uint64_t>(year + 100000)));
        std::vector<double> boots;
        boots.reserve(static_cast<std::size_t>(n_boot));
        std::map<int, std::pair<long long, long long>> counts;  // year -> (sum, n)
        for (int b = 0; b < n_boot; ++b) {
            counts.clear();
            for (std::size_t i = 0; i < pool.size(); ++i) {
                const auto& [y, v] = pool[rng() % pool.size()];
                auto& [sum, n] = counts[y];
                sum += v;
                ++n;
            }
            std::vector<double> fracs;
            for (const auto& [y, sn] : counts)
                fracs.push_back(static_cast<double>(sn.first) / static_cast<double>(sn.second));
            std::sort(fracs.begin(), fracs.end());
            const std::size_t n = fracs.size();
            boots.push_back(n % 2 == 1 ? fracs[n / 2]
                                       : 0.5 * (fracs[n / 2 - 1] + fracs[n / 2]));
        }
        CiPoint pt;
        pt.year = year;
        pt.value = value;
        pt.ci_low = std::min(detail::percentile(boots, alpha), value);
        pt.ci_high = std::max(detail::percentile(boots, 1.0 - alpha), value);
        out.push_back(pt);
    }
    return out;
}

// ---- charts -----------------------------------------------------------------

struct SvgSeries {
    std::string label;
    std::string color;                 // css color
    std::vector<SeriesPoint> points;
    std::vector<CiPoint> band;         // optional confidence band
};

// Minimal static line chart (no interactivity): axes, one polyline per
// series, shaded CI bands, a legend.
inline void write_svg_chart(const std::string& path, const std::string& title,
                            const std::vector<SvgSeries>& series) {
    const int W = 760, H = 420, ml = 60, mr = 20, mt = 40, mb = 40;
    int ymin_year = 1 << 30, ymax_year = -(1 << 30);
    double vmax = 0.0;
    for (const auto& s : series) {
        for (const auto& p : s.points) {
            ymin_year = std::min(ymin_year, p.year);
            ymax_year = std::max(ymax_year, p.year);
            vmax = std::max(vmax, p.value);
        }
        for (const auto& p : s.band) vmax = std::max(vmax, p.ci_high);
    }
    if (ymin_year > ymax_year) {
        ymin_year = 0;
        ymax_year = 1;
    }
    if (vmax <= 0.0) vmax = 1.0;
    vmax = std::min(1.05 * vmax, 1.0);
    const double xs = static_cast<double>(W - ml - mr) / std::max(1, ymax_year - ymin_year);
    const double ys = static_cast<double>(H - mt - mb) / vmax;
    auto px = [&](int year) { return ml + xs * (year - ymin_year); };
    auto py = [&](double v) { return H - mb - ys * v; };

    std::ofstream out(path);
    if (!out) throw DataError("cannot write chart: " + path);
    char buf[160];
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << title
        << "</text>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\""
        << H - mb << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << H - mb
        << "\" stroke=\"black\"/>\n";
    for (int tick = 0; tick <= 4; ++tick) {
        const double v = vmax * tick / 4.0;
        std::snprintf(buf, sizeof buf, "%.2f", v);
        out << "<text x=\"" << ml - 6 << "\" y=\"" << py(v) + 4
            << "\" text-anchor=\"end\" font-size=\"10\">" << buf << "</text>\n";
    }
    for (int year = (ymin_year + 9) / 10 * 10; year <= ymax_year; year += 10) {
        out << "<text x=\"" << px(year) << "\" y=\"" << H - mb + 14
            << "\" text-anchor=\"middle\" font-size=\"10\">" << year << "</text>\n";
    }
    int legend_y = mt;
    for (const auto& s : series) {
        if (!s.band.empty()) {
            std::string d = "M";
            for (const auto& p : s.band) {
                std::snprintf(buf, sizeof buf, "%.1f %.1f L", px(p.year), py(p.ci_high));
                d += buf;
            }
            for (auto it = s.band.rbegin(); it != s.band.rend(); ++it) {
                std::snprintf(buf, sizeof buf, "%.1f %.1f L", px(it->year), py(it->ci_low));
                d += buf;
            }
            d.resize(d.size() - 2);  // trailing " L"
            out << "<path d=\"" << d << "Z\" fill=\"" << s.color
                << "\" opacity=\"0.15\" stroke=\"none\"/>\n";
        }
        out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
        for (const auto& p : s.points) {
            std::snprintf(buf, sizeof buf, "%.1f,%.1f ", px(p.year), py(p.value));
            out << buf;
        }
        out << "\"/>\n";
        out << "<rect x=\"" << W - mr - 150 << "\" y=\"" << legend_y << "\" width=\"10\" height=\"10\" fill=\""
            << s.color << "\"/>\n";
        out << "<text x=\"" << W - mr - 136 << "\" y=\"" << legend_y + 9 << "\" font-size=\"11\">"
            << s.label << "</text>\n";
        legend_y += 16;
    }
    out << "</svg>\n";
}

}  // namespace songbias
