#pragma once

#include <array>
#include <string>

#include "triad/errors.hpp"

namespace triad {

/// The three modalities of the shared embedding space. Eeg is the anchor:
/// every alignment term and every balance statistic is computed relative to it.
enum class Modality : int { Eeg = 0, Image = 1, Text = 2 };

inline constexpr std::array<Modality, 3> kAllModalities = {Modality::Eeg, Modality::Image,
                                                           Modality::Text};

/// Which modality a trainable parameter belongs to, for gradient scaling.
/// Shared covers parameters that must never be down-weighted.
enum class Attribution : int { Eeg = 0, Image = 1, Text = 2, Shared = 3 };

inline const char* to_string(Modality m) {
    switch (m) {
    case Modality::Eeg:
        return "eeg";
    case Modality::Image:
        return "image";
    case Modality::Text:
        return "text";
    }
    throw UnknownModalityAttribution("invalid Modality value");
}

inline const char* to_string(Attribution a) {
    switch (a) {
    case Attribution::Eeg:
        return "eeg";
    case Attribution::Image:
        return "image";
    case Attribution::Text:
        return "text";
    case Attribution::Shared:
        return "shared";
    }
    throw UnknownModalityAttribution("invalid Attribution value");
}

inline Modality modality_from_string(const std::string& s) {
    if (s == "eeg") return Modality::Eeg;
    if (s == "image") return Modality::Image;
    if (s == "text") return Modality::Text;
    throw UnknownModalityAttribution("unknown modality tag: " + s);
}

inline Attribution attribution_from_string(const std::string& s) {
    if (s == "eeg") return Attribution::Eeg;
    if (s == "image") return Attribution::Image;
    if (s == "text") return Attribution::Text;
    if (s == "shared") return Attribution::Shared;
    throw UnknownModalityAttribution("unknown attribution tag: " + s);
}

/// Fixed-size map from Modality to T, indexed by the enum value.
template <typename T>
struct PerModality {
    std::array<T, 3> values{};

    T& operator[](Modality m) { return values[static_cast<int>(m)]; }
    const T& operator[](Modality m) const { return values[static_cast<int>(m)]; }

    bool operator==(const PerModality&) const = default;
};

} // namespace triad
