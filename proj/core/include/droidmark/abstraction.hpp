#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "droidmark/bundle.hpp"

// Family-mode abstraction: every qualified call name maps to one of a
// closed set of families. The index order below is published and used
// bit-exactly in feature CSV headers.

namespace droidmark {

enum class Family : int {
    kAndroid = 0,
    kGoogle = 1,
    kJava = 2,
    kJavax = 3,
    kXml = 4,
    kApache = 5,
    kJunit = 6,
    kJson = 7,
    kDom = 8,
    kSelfDefined = 9,
    kObfuscated = 10,
};

inline constexpr int kFamilyCount = 11;
inline constexpr int kKnownFamilyCount = 9;  // families with a name prefix

// Display names, indexed by Family. Used in feature names (`<src>To<dst>`).
const std::array<std::string_view, kFamilyCount>& family_names();

std::string_view family_name(Family f);

// Maps a dotted qualified name to its family: longest known prefix first,
// then the obfuscation heuristic (every package segment has length <= 2),
// else self-defined. Throws ParseError on a malformed name.
Family abstract_name(std::string_view qualified_name);

// One entry per method with at least one call: the declaring unit's family
// followed by the callee families in source order.
struct CallSequence {
    std::string app_id;
    std::vector<std::vector<Family>> methods;
};

CallSequence extract_call_sequences(const AppBundle& bundle,
                                    const std::string& app_id = {});

}  // namespace droidmark
