#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "songbias/errors.hpp"

namespace songbias {

enum class ArtistType { solo, group };
enum class Gender { male, female, mixed, other, unknown };

inline const char* to_string(ArtistType t) {
    return t == ArtistType::solo ? "solo" : "group";
}

inline const char* to_string(Gender g) {
    switch (g) {
        case Gender::male: return "male";
        case Gender::female: return "female";
        case Gender::mixed: return "mixed";
        case Gender::other: return "other";
        default: return "unknown";
    }
}

inline ArtistType artist_type_from_string(const std::string& s) {
    if (s == "solo") return ArtistType::solo;
    if (s == "group") return ArtistType::group;
    throw DataError("invalid artist_type: " + s);
}

inline Gender gender_from_string(const std::string& s) {
    if (s == "male") return Gender::male;
    if (s == "female") return Gender::female;
    if (s == "mixed") return Gender::mixed;
    if (s == "other") return Gender::other;
    if (s == "unknown" || s.empty()) return Gender::unknown;
    throw DataError("invalid gender: " + s);
}

// One lyric plus its metadata; the atom of everything downstream.
struct SongRecord {
    std::string song_id;
    std::string title;
    std::string artist_id;
    std::string artist_name;
    ArtistType artist_type = ArtistType::solo;
    Gender gender = Gender::unknown;
    int year = 0;
    std::optional<std::string> genre_raw;
    std::optional<std::string> genre_top;
    std::string language;
    std::string lyrics;
};

using Corpus = std::vector<SongRecord>;

// Group gender from the member list: all-male -> male, all-female -> female,
// both -> mixed, anything unknown/other or an empty list -> unknown.
inline Gender assign_group_gender(const std::vector<Gender>& members) {
    if (members.empty()) return Gender::unknown;
    bool any_male = false, any_female = false;
    for (Gender g : members) {
        if (g == Gender::male) any_male = true;
        else if (g == Gender::female) any_female = true;
        else return Gender::unknown;
    }
    if (any_male && any_female) return Gender::mixed;
    return any_male ? Gender::male : Gender::female;
}

// Parses one line-delimited record. A "member_genders" array, when present on
// a group record, takes precedence over the "gender" field.
inline SongRecord parse_song_record(const std::string& line) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("bad json: ") + e.what());
    }
    if (!j.is_object()) throw DataError("record is not an object");

    SongRecord r;
    try {
        r.song_id = j.at("song_id").get<std::string>();
        r.title = j.at("title").get<std::string>();
        r.artist_id = j.at("artist_id").get<std::string>();
        r.artist_name = j.at("artist_name").get<std::string>();
        r.artist_type = artist_type_from_string(j.at("artist_type").get<std::string>());
        if (!j.at("year").is_number_integer()) throw DataError("year is not an integer");
        r.year = j.at("year").get<int>();
        r.language = j.at("language").get<std::string>();
        r.lyrics = j.at("lyrics").get<std::string>();
        if (j.contains("genre_raw") && !j["genre_raw"].is_null())
            r.genre_raw = j["genre_raw"].get<std::string>();
        if (j.contains("genre_top") && !j["genre_top"].is_null())
            r.genre_top = j["genre_top"].get<std::string>();
        if (r.artist_type == ArtistType::group && j.contains("member_genders") &&
            j["member_genders"].is_array()) {
            std::vector<Gender> members;
            for (const auto& m : j["member_genders"])
                members.push_back(gender_from_string(m.get<std::string>()));
            r.gender = assign_group_gender(members);
        } else {
            r.gender = gender_from_string(j.value("gender", std::string("unknown")));
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("missing or invalid field: ") + e.what());
    }
    if (r.song_id.empty()) throw DataError("empty song_id");
    if (r.artist_type == ArtistType::solo && r.gender == Gender::mixed)
        throw DataError("solo artist cannot have gender 'mixed'");
    return r;
}

inline nlohmann::json song_record_to_json(const SongRecord& r) {
    nlohmann::json j;
    j["song_id"] = r.song_id;
    j["title"] = r.title;
    j["artist_id"] = r.artist_id;
    j["artist_name"] = r.artist_name;
    j["artist_type"] = to_string(r.artist_type);
    j["gender"] = to_string(r.gender);
    j["year"] = r.year;
    if (r.genre_raw) j["genre_raw"] = *r.genre_raw;
    if (r.genre_top) j["genre_top"] = *r.genre_top;
    j["language"] = r.language;
    j["lyrics"] = r.lyrics;
    return j;
}

}  // namespace songbias
