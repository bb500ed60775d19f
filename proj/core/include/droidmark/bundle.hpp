#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <utility>
#include <vector>

// Normalized app-bundle format: an on-disk directory standing in for an
// unpacked APK (manifest, layout files, and a tree of code units).

namespace droidmark {

struct CallInstruction {
    std::string callee;  // fully qualified callee class name
    std::string method;  // callee method name
    bool operator==(const CallInstruction&) const = default;
};

struct MethodDef {
    std::string name;
    std::vector<CallInstruction> calls;  // source order preserved
    bool operator==(const MethodDef&) const = default;
};

struct CodeUnit {
    std::string name;            // unit (class) simple name
    std::string qualified_name;  // must equal directory path joined with '.' + name
    std::vector<MethodDef> methods;
    bool operator==(const CodeUnit&) const = default;
};

struct DirNode {
    std::string name;  // nonempty, no path separators
    std::vector<DirNode> children;
    std::vector<CodeUnit> units;
    bool operator==(const DirNode&) const = default;
};

struct DirTree {
    std::vector<DirNode> roots;  // forest
    bool operator==(const DirTree&) const = default;

    // Longest root-to-leaf directory path; 0 for an empty forest.
    int height() const;
};

struct ManifestInfo {
    std::set<std::string> permissions;
    std::vector<std::string> components;  // qualified names
    bool operator==(const ManifestInfo&) const = default;
};

struct LayoutFile {
    std::string name;
    std::vector<std::string> refs;  // qualified names
    bool operator==(const LayoutFile&) const = default;
};

struct AppBundle {
    ManifestInfo manifest;
    DirTree code_tree;
    std::vector<LayoutFile> layouts;
    bool operator==(const AppBundle&) const = default;

    // Sorts sibling directories, units and layouts by name so that
    // structural equality matches on-disk round trips. Method/call
    // order is source order and is never touched.
    void normalize();
};

enum class Label { kBenign, kMalicious };

inline const char* label_name(Label l) {
    return l == Label::kBenign ? "benign" : "malicious";
}

// Parameters of the synthetic corpus generator. A fixed seed makes
// generation fully deterministic.
struct CorpusSpec {
    int benign_count = 2000;
    int malicious_count = 200;
    std::uint64_t seed = 1;

    // tree shape
    int min_height = 2;
    int max_height = 4;
    int max_subdirs = 2;        // children per directory at each level
    int max_units_per_dir = 3;  // at least 1 in every leaf directory
    int max_methods_per_unit = 3;
    int min_calls_per_method = 4;
    int max_calls_per_method = 8;

    // call-profile knobs. Every app draws the same kind of general call mix
    // (a small self-call weight plus bursty calls into a sparse set of known
    // families). Malicious apps additionally dedicate a fraction of their
    // methods to "payload" methods that call only the app's own units, which
    // concentrates transition mass on the self-to-self cell while leaving
    // the rest of their profile statistically identical to benign apps. A
    // small share of malicious apps ("stealthy") carry no payload at all, so
    // only their permission profile gives them away.
    double general_self_weight_max = 0.10;
    double payload_fraction_min = 0.12;
    double payload_fraction_max = 0.18;
    double malicious_stealth_prob = 0.06;

    // fraction of apps generated with name-mangled (short) package segments
    double obfuscated_prob = 0.08;

    // permission-profile knobs: probability a malicious app carries the
    // SMS permission suite, and the benign leak rate of the same suite
    double malicious_sms_prob = 0.94;
    double benign_sms_prob = 0.002;

    void validate() const;  // throws std::invalid_argument
};

// Parses the on-disk bundle layout. Throws droidmark::ParseError on a
// malformed line (with file and line number), duplicate names, or
// dangling references.
AppBundle parse_bundle(const std::filesystem::path& path);

// Serializes a bundle to its on-disk layout. parse_bundle(write_bundle(b))
// is structurally equal to b for any valid normalized bundle.
void write_bundle(const AppBundle& bundle, const std::filesystem::path& path);

// Returns all invariant violations (empty means the bundle is valid).
// Violations are data, not errors; each names the offending reference.
std::vector<std::string> check_integrity(const AppBundle& bundle);

// Deterministic synthetic corpus. Benign apps route most calls into known
// family names; malicious apps concentrate calls among their own units and
// request a distinct permission profile.
std::vector<std::pair<AppBundle, Label>> generate_corpus(const CorpusSpec& spec);

// `key = value` corpus spec file.
CorpusSpec parse_corpus_spec(const std::filesystem::path& path);

// Applies one spec-file key; false if the key is not a corpus knob.
bool set_corpus_key(CorpusSpec& spec, const std::string& key,
                    const std::string& value);

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace droidmark
