#include "droidmark/abstraction.hpp"

#include <stdexcept>

namespace droidmark {

namespace {

std::vector<std::string_view> split_segments(std::string_view name) {
    std::vector<std::string_view> segs;
    std::size_t start = 0;
    while (true) {
        auto dot = name.find('.', start);
        if (dot == std::string_view::npos) {
            segs.push_back(name.substr(start));
            break;
        }
        segs.push_back(name.substr(start, dot - start));
        start = dot + 1;
    }
    return segs;
}

}  // namespace

const std::array<std::string_view, kFamilyCount>& family_names() {
    static const std::array<std::string_view, kFamilyCount> names = {
        "android", "google", "java",        "javax",     "xml",  "apache",
        "junit",   "json",   "dom",         "selfdefined", "obfuscated"};
    return names;
}

std::string_view family_name(Family f) {
    return family_names()[static_cast<int>(f)];
}

Family abstract_name(std::string_view qualified_name) {
    auto segs = split_segments(qualified_name);
    for (auto seg : segs)
        if (seg.empty())
            throw ParseError("malformed qualified name: '" +
                             std::string(qualified_name) + "'");

    // Known prefixes dominate: any name whose first segment is a family
    // prefix maps to that family regardless of suffix.
    for (int i = 0; i < kKnownFamilyCount; ++i)
        if (segs.front() == family_names()[i]) return static_cast<Family>(i);

    // Obfuscation heuristic: every package segment (all but the unit name)
    // has length <= 2. Names without a package are self-defined.
    if (segs.size() >= 2) {
        bool obfuscated = true;
        for (std::size_t i = 0; i + 1 < segs.size(); ++i)
            if (segs[i].size() > 2) obfuscated = false;
        if (obfuscated) return Family::kObfuscated;
    }
    return Family::kSelfDefined;
}

namespace {

void collect_sequences(const DirNode& node, CallSequence& out) {
    for (const auto& unit : node.units) {
        Family caller = abstract_name(unit.qualified_name);
        for (const auto& method : unit.methods) {
            if (method.calls.empty()) continue;  // zero-call methods contribute nothing
            std::vector<Family> seq;
            seq.reserve(method.calls.size() + 1);
            seq.push_back(caller);
            for (const auto& call : method.calls)
                seq.push_back(abstract_name(call.callee));
            out.methods.push_back(std::move(seq));
        }
    }
    for (const auto& child : node.children) collect_sequences(child, out);
}

}  // namespace

CallSequence extract_call_sequences(const AppBundle& bundle, const std::string& app_id) {
    CallSequence out;
    out.app_id = app_id;
    for (const auto& root : bundle.code_tree.roots) collect_sequences(root, out);
    return out;
}

}  // namespace droidmark
