#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "songbias/errors.hpp"
#include "songbias/records.hpp"
#include "songbias/text.hpp"

namespace songbias {

struct FilterConfig {
    int year_min = 1960;
    int year_max = 2009;
    int min_words = 10;
    int min_lines = 4;
    int min_songs_per_artist = 10;  // an artist needs strictly more songs than this
    std::set<std::string> language_allow = {"english"};

    void validate() const {
        if (year_min > year_max) throw ConfigError("year_min > year_max");
        if (min_words < 1) throw ConfigError("min_words < 1");
        if (min_lines < 1) throw ConfigError("min_lines < 1");
    }
};

enum class RejectReason {
    parse_error,
    duplicate_id,
    year_range,
    language,
    artist_min_songs,
    gender_unknown,
    min_words,
    min_lines,
};

inline const char* to_string(RejectReason r) {
    switch (r) {
        case RejectReason::parse_error: return "parse_error";
        case RejectReason::duplicate_id: return "duplicate_id";
        case RejectReason::year_range: return "year_range";
        case RejectReason::language: return "language";
        case RejectReason::artist_min_songs: return "artist_min_songs";
        case RejectReason::gender_unknown: return "gender_unknown";
        case RejectReason::min_words: return "min_words";
        default: return "min_lines";
    }
}

struct Rejection {
    std::string song_id;  // "line:<n>" when the record did not parse
    RejectReason reason;
    std::string detail;
};

struct FilterResult {
    Corpus accepted;                  // sorted by song_id
    std::vector<Rejection> rejected;  // sorted by song_id
};

// A raw input record: either a parsed song or a parse failure.
struct RawRecord {
    SongRecord record;
    bool ok = false;
    std::string source_id;  // id used in rejection reports when !ok
    std::string error;
};

inline RawRecord make_raw(const std::string& line, std::size_t line_no) {
    RawRecord raw;
    try {
        raw.record = parse_song_record(line);
        raw.ok = true;
        raw.source_id = raw.record.song_id;
    } catch (const Error& e) {
        raw.ok = false;
        raw.source_id = "line:" + std::to_string(line_no);
        raw.error = e.what();
    }
    return raw;
}

// Applies the full filter chain. The per-artist song-count pool is the set of
// records that already passed the year/language checks, before any
// lyric-length filtering. The output is independent of input order: accepted
// and rejected are both sorted by song_id, and duplicated song_ids drop every
// copy.
inline FilterResult filter_songs(const std::vector<RawRecord>& records, const FilterConfig& cfg) {
    cfg.validate();
    FilterResult out;

    std::unordered_map<std::string, int> id_count;
    for (const auto& raw : records)
        if (raw.ok) ++id_count[raw.record.song_id];

    std::vector<const SongRecord*> pool;  // passed parse/dup/year/language
    for (const auto& raw : records) {
        if (!raw.ok) {
            out.rejected.push_back({raw.source_id, RejectReason::parse_error, raw.error});
            continue;
        }
        const SongRecord& r = raw.record;
        if (id_count[r.song_id] > 1) {
            out.rejected.push_back({r.song_id, RejectReason::duplicate_id, ""});
            continue;
        }
        if (r.year < cfg.year_min || r.year > cfg.year_max) {
            out.rejected.push_back({r.song_id, RejectReason::year_range, std::to_string(r.year)});
            continue;
        }
        if (!cfg.language_allow.count(r.language)) {
            out.rejected.push_back({r.song_id, RejectReason::language, r.language});
            continue;
        }
        pool.push_back(&r);
    }

    std::unordered_map<std::string, int> artist_songs;
    for (const SongRecord* r : pool) ++artist_songs[r->artist_id];

    for (const SongRecord* rp : pool) {
        const SongRecord& r = *rp;
        if (artist_songs[r.artist_id] <= cfg.min_songs_per_artist) {
            out.rejected.push_back({r.song_id, RejectReason::artist_min_songs,
                                    std::to_string(artist_songs[r.artist_id])});
            continue;
        }
        if (r.gender == Gender::unknown) {
            out.rejected.push_back({r.song_id, RejectReason::gender_unknown, ""});
            continue;
        }
        if (text::count_whitespace_tokens(r.lyrics) < static_cast<std::size_t>(cfg.min_words)) {
            out.rejected.push_back({r.song_id, RejectReason::min_words, ""});
            continue;
        }
        if (text::non_empty_lines(r.lyrics).size() < static_cast<std::size_t>(cfg.min_lines)) {
            out.rejected.push_back({r.song_id, RejectReason::min_lines, ""});
            continue;
        }
        out.accepted.push_back(r);
    }

    std::sort(out.accepted.begin(), out.accepted.end(),
              [](const SongRecord& a, const SongRecord& b) { return a.song_id < b.song_id; });
    std::sort(out.rejected.begin(), out.rejected.end(), [](const Rejection& a, const Rejection& b) {
        return a.song_id != b.song_id ? a.song_id < b.song_id : a.reason < b.reason;
    });
    return out;
}

// Raw-genre -> top-level-genre table; lookups are case-insensitive and
// whitespace-insensitive.
class GenreMap {
public:
    GenreMap() = default;

    static std::string normalize_key(std::string_view raw) {
        std::string lowered = text::to_lower_ascii(text::trim(raw));
        std::string out;
        bool prev_space = false;
        for (char c : lowered) {
            const bool sp = (static_cast<unsigned char>(c) <= ' ');
            if (sp && prev_space) continue;
            out.push_back(sp ? ' ' : c);
            prev_space = sp;
        }
        return out;
    }

    void add(std::string_view raw, std::string_view top) {
        entries_[normalize_key(raw)] = std::string(top);
    }

    std::optional<std::string> lookup(const std::optional<std::string>& raw) const {
        if (!raw) return std::nullopt;
        auto it = entries_.find(normalize_key(*raw));
        if (it == entries_.end()) return std::nullopt;
        return it->second;
    }

    std::size_t size() const { return entries_.size(); }

    // Flat key<TAB>value file; '#' starts a comment line.
    static GenreMap load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw MissingArtifactError("cannot open genre map: " + path);
        GenreMap m;
        std::string line;
        std::size_t n = 0;
        while (std::getline(in, line)) {
            ++n;
            if (line.empty() || line[0] == '#') continue;
            auto tab = line.find('\t');
            if (tab == std::string::npos)
                throw ConfigError("genre map line " + std::to_string(n) + ": expected key<TAB>value");
            m.add(line.substr(0, tab), text::trim(line.substr(tab + 1)));
        }
        return m;
    }

private:
    std::map<std::string, std::string> entries_;
};

inline std::optional<std::string> map_genre(const std::optional<std::string>& genre_raw,
                                            const GenreMap& map) {
    return map.lookup(genre_raw);
}

enum class PartitionName { all_solo, male_solo, female_solo };

inline const char* to_string(PartitionName p) {
    switch (p) {
        case PartitionName::all_solo: return "all_solo";
        case PartitionName::male_solo: return "male_solo";
        default: return "female_solo";
    }
}

struct CorpusPartition {
    PartitionName name;
    std::vector<std::string> song_ids;  // sorted by song_id
};

// The three embedding-training subsets. all_solo covers every solo song
// (male, female and other); the gendered partitions are disjoint.
inline std::vector<CorpusPartition> partition_corpora(const Corpus& corpus) {
    CorpusPartition all{PartitionName::all_solo, {}};
    CorpusPartition male{PartitionName::male_solo, {}};
    CorpusPartition female{PartitionName::female_solo, {}};
    for (const auto& r : corpus) {
        if (r.artist_type != ArtistType::solo) continue;
        all.song_ids.push_back(r.song_id);
        if (r.gender == Gender::male) male.song_ids.push_back(r.song_id);
        else if (r.gender == Gender::female) female.song_ids.push_back(r.song_id);
    }
    for (auto* p : {&all, &male, &female}) std::sort(p->song_ids.begin(), p->song_ids.end());
    return {all, male, female};
}

// Concatenated lyric text of a partition, songs in song_id order, one song's
// lyrics terminated by a newline. Byte-reproducible for a fixed corpus.
inline std::string partition_text(const Corpus& corpus, const CorpusPartition& part) {
    std::unordered_map<std::string, const SongRecord*> by_id;
    by_id.reserve(corpus.size());
    for (const auto& r : corpus) by_id[r.song_id] = &r;
    std::string out;
    for (const auto& id : part.song_ids) {
        auto it = by_id.find(id);
        if (it == by_id.end()) throw DataError("partition references unknown song_id: " + id);
        out += it->second->lyrics;
        if (out.empty() || out.back() != '\n') out.push_back('\n');
    }
    return out;
}

}  // namespace songbias
