#include "droidmark/attack.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace droidmark {

const char* attack_variant_name(AttackVariant v) {
    switch (v) {
        case AttackVariant::kRandom: return "random";
        case AttackVariant::kFullStatistical: return "full_statistical";
        case AttackVariant::kBlackHole: return "black_hole";
    }
    return "?";
}

int LevelPolicy::produce(int height, std::mt19937_64& rng) const {
    if (kind == kFixed) return std::clamp(fixed_value, 0, std::max(height, 0));
    if (height <= 0) return 0;
    return static_cast<int>(rng() % static_cast<std::uint64_t>(height + 1));
}

double RatioPolicy::produce(std::mt19937_64& rng) const {
    if (kind == kFixed) return fixed_value;
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

void AttackConfig::validate() const {
    if (mode_elements.empty())
        throw std::invalid_argument("mode_elements must be nonempty");
    for (Family f : mode_elements)
        if (static_cast<int>(f) >= kKnownFamilyCount)
            throw std::invalid_argument(
                "mode_elements must hold known families only");
    if (ratio_policy.kind == RatioPolicy::kFixed &&
        (ratio_policy.fixed_value < 0.0 || ratio_policy.fixed_value > 1.0))
        throw std::invalid_argument("ratio policy out of [0,1]");
}

std::string RewriteMap::apply(const std::string& name) const {
    for (const auto& [old_prefix, new_prefix] : entries) {
        if (name == old_prefix) return new_prefix;
        if (name.size() > old_prefix.size() && name.starts_with(old_prefix) &&
            name[old_prefix.size()] == '.')
            return new_prefix + name.substr(old_prefix.size());
    }
    return name;
}

// ---------------------------------------------------------------------------
// mode-element selection

namespace {

// Sum of every feature with f as source or destination (diagonal once).
double family_mass(const FeatureVector& v, int f) {
    double mass = 0.0;
    for (int d = 0; d < kFamilyCount; ++d)
        mass += v[static_cast<std::size_t>(f) * kFamilyCount + d];
    for (int s = 0; s < kFamilyCount; ++s)
        mass += v[static_cast<std::size_t>(s) * kFamilyCount + f];
    mass -= v[static_cast<std::size_t>(f) * kFamilyCount + f];
    return mass;
}

std::array<double, kKnownFamilyCount> mean_masses(
    const std::vector<FeatureVector>& features) {
    std::array<double, kKnownFamilyCount> out{};
    for (const auto& v : features)
        for (int f = 0; f < kKnownFamilyCount; ++f) out[f] += family_mass(v, f);
    for (auto& m : out) m /= static_cast<double>(features.size());
    return out;
}

}  // namespace

std::vector<Family> select_elements_random(const std::vector<Family>& families,
                                           int k, std::uint64_t seed) {
    if (k < 1 || k > static_cast<int>(families.size()))
        throw std::invalid_argument("k out of range");
    std::vector<Family> pool = families;
    std::mt19937_64 rng(seed);
    for (int i = 0; i < k; ++i) {
        std::size_t j = i + rng() % (pool.size() - i);
        std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
}

std::vector<Family> select_elements_train_stats(
    const std::vector<FeatureVector>& benign,
    const std::vector<FeatureVector>& malicious) {
    if (benign.empty() || malicious.empty())
        throw std::invalid_argument("statistics require nonempty feature sets");
    auto b = mean_masses(benign);
    auto m = mean_masses(malicious);
    int best = 0;
    double best_score = b[0] - m[0];
    for (int f = 1; f < kKnownFamilyCount; ++f) {
        double score = b[f] - m[f];
        if (score > best_score) {  // ties keep the lower family index
            best_score = score;
            best = f;
        }
    }
    return {static_cast<Family>(best)};
}

std::vector<Family> select_elements_blackhole(
    const std::vector<FeatureVector>& test_features) {
    if (test_features.empty())
        throw std::invalid_argument("statistics require nonempty feature sets");
    auto masses = mean_masses(test_features);
    int best = 0;
    for (int f = 1; f < kKnownFamilyCount; ++f)
        if (masses[f] < masses[best]) best = f;
    return {static_cast<Family>(best)};
}

AttackConfig make_variant_config(AttackVariant variant,
                                 const CorpusStatistics& stats,
                                 std::uint64_t seed) {
    AttackConfig cfg;
    cfg.variant = variant;
    cfg.seed = seed;
    switch (variant) {
        case AttackVariant::kRandom: {
            std::vector<Family> known;
            for (int f = 0; f < kKnownFamilyCount; ++f)
                known.push_back(static_cast<Family>(f));
            cfg.mode_elements = select_elements_random(known, 3, seed);
            cfg.level_policy = {LevelPolicy::kUniform, 0};
            cfg.ratio_policy = {RatioPolicy::kUniform, 0.0};
            break;
        }
        case AttackVariant::kFullStatistical:
            if (stats.train_benign.empty() || stats.train_malicious.empty())
                throw std::invalid_argument(
                    "full_statistical requires training statistics");
            cfg.mode_elements = select_elements_train_stats(stats.train_benign,
                                                            stats.train_malicious);
            cfg.level_policy = {LevelPolicy::kFixed, 0};
            cfg.ratio_policy = {RatioPolicy::kFixed, 1.0};
            break;
        case AttackVariant::kBlackHole:
            if (stats.test_malicious.empty())
                throw std::invalid_argument("black_hole requires test statistics");
            cfg.mode_elements = select_elements_blackhole(stats.test_malicious);
            cfg.level_policy = {LevelPolicy::kFixed, 0};
            cfg.ratio_policy = {RatioPolicy::kFixed, 1.0};
            break;
    }
    cfg.validate();
    return cfg;
}

// ---------------------------------------------------------------------------
// structure break

namespace {

std::vector<std::string> split_dotted(const std::string& name) {
    std::vector<std::string> segs;
    std::size_t start = 0;
    while (true) {
        auto dot = name.find('.', start);
        if (dot == std::string::npos) {
            segs.push_back(name.substr(start));
            break;
        }
        segs.push_back(name.substr(start, dot - start));
        start = dot + 1;
    }
    return segs;
}

void collect_level(const std::vector<DirNode>& nodes, const std::string& prefix,
                   int depth, int target, std::vector<std::string>& out) {
    for (const auto& node : nodes) {
        std::string dotted = prefix.empty() ? node.name : prefix + "." + node.name;
        if (depth == target)
            out.push_back(dotted);
        else
            collect_level(node.children, dotted, depth + 1, target, out);
    }
}

// Detaches the directory at the dotted path; throws if absent.
DirNode detach_dir(DirTree& tree, const std::vector<std::string>& segs) {
    std::vector<DirNode>* level = &tree.roots;
    for (std::size_t i = 0; i + 1 < segs.size(); ++i) {
        DirNode* next = nullptr;
        for (auto& node : *level)
            if (node.name == segs[i]) {
                next = &node;
                break;
            }
        if (!next) throw std::invalid_argument("no directory at requested level");
        level = &next->children;
    }
    for (auto it = level->begin(); it != level->end(); ++it) {
        if (it->name == segs.back()) {
            DirNode detached = std::move(*it);
            level->erase(it);
            return detached;
        }
    }
    throw std::invalid_argument("no directory at requested level");
}

void rewrite_names(DirNode& node, const RewriteMap& map) {
    for (auto& unit : node.units) {
        unit.qualified_name = map.apply(unit.qualified_name);
        for (auto& method : unit.methods)
            for (auto& call : method.calls) call.callee = map.apply(call.callee);
    }
    for (auto& child : node.children) rewrite_names(child, map);
}

bool is_name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}

}  // namespace

AttackOutcome apply_structure_break(const AppBundle& bundle, Family f,
                                    const std::vector<std::string>& root_paths,
                                    int level, double ratio) {
    AttackOutcome out;
    out.bundle = bundle;
    out.element = f;
    out.level = level;
    out.ratio = ratio;
    if (root_paths.empty()) return out;

    std::string f_name(family_name(f));

    // References that will NOT be rewritten (they start with none of the
    // moved prefixes). A moved directory must not be renamed onto such a
    // reference's path, or a previously external name (e.g. an API call)
    // would suddenly resolve into the owned tree and dangle.
    std::vector<std::string> fixed_refs;
    {
        std::vector<std::string> refs;
        std::vector<const DirNode*> stack;
        for (const auto& r : bundle.code_tree.roots) stack.push_back(&r);
        while (!stack.empty()) {
            const DirNode* n = stack.back();
            stack.pop_back();
            for (const auto& u : n->units)
                for (const auto& m : u.methods)
                    for (const auto& call : m.calls) refs.push_back(call.callee);
            for (const auto& ch : n->children) stack.push_back(&ch);
        }
        refs.insert(refs.end(), bundle.manifest.components.begin(),
                    bundle.manifest.components.end());
        for (const auto& layout : bundle.layouts)
            refs.insert(refs.end(), layout.refs.begin(), layout.refs.end());

        auto extends = [](const std::string& name, const std::string& prefix) {
            return name.size() > prefix.size() && name.compare(0, prefix.size(), prefix) == 0 &&
                   name[prefix.size()] == '.';
        };
        for (auto& ref : refs) {
            bool rewritten = false;
            for (const auto& path : root_paths)
                if (ref == path || extends(ref, path)) rewritten = true;
            if (!rewritten) fixed_refs.push_back(std::move(ref));
        }
    }
    auto captures = [&](const std::string& new_prefix) {
        for (const auto& ref : fixed_refs)
            if (ref == new_prefix ||
                (ref.size() > new_prefix.size() &&
                 ref.compare(0, new_prefix.size(), new_prefix) == 0 &&
                 ref[new_prefix.size()] == '.'))
                return true;
        return false;
    };

    // Detach the selected directories first so that a root that is itself
    // being moved never doubles as the merge target.
    std::vector<DirNode> moved;
    moved.reserve(root_paths.size());
    for (const auto& path : root_paths)
        moved.push_back(detach_dir(out.bundle.code_tree, split_dotted(path)));

    DirNode* target = nullptr;
    for (auto& root : out.bundle.code_tree.roots)
        if (root.name == f_name) target = &root;  // merge into an existing root
    if (!target) {
        out.bundle.code_tree.roots.push_back(DirNode{f_name, {}, {}});
        target = &out.bundle.code_tree.roots.back();
    }

    for (std::size_t i = 0; i < root_paths.size(); ++i) {
        DirNode node = std::move(moved[i]);
        std::string basename = node.name;
        auto taken = [&](const std::string& name) {
            return std::any_of(target->children.begin(), target->children.end(),
                               [&](const DirNode& c) { return c.name == name; });
        };
        int suffix = 0;
        std::string new_name = basename;
        while (taken(new_name) || captures(f_name + "." + new_name))
            new_name = basename + "_" + std::to_string(++suffix);
        node.name = new_name;
        out.map.entries.emplace_back(root_paths[i], f_name + "." + new_name);
        target->children.push_back(std::move(node));
    }

    for (auto& root : out.bundle.code_tree.roots) rewrite_names(root, out.map);
    for (auto& comp : out.bundle.manifest.components) comp = out.map.apply(comp);
    for (auto& layout : out.bundle.layouts)
        for (auto& ref : layout.refs) ref = out.map.apply(ref);

    out.bundle.normalize();
    return out;
}

AttackOutcome structure_break(const AppBundle& bundle, const AttackConfig& cfg) {
    cfg.validate();
    std::mt19937_64 rng(cfg.seed);
    int height = bundle.code_tree.height();
    int level = cfg.level_policy.produce(height, rng);
    double ratio = cfg.ratio_policy.produce(rng);
    Family f = cfg.mode_elements[rng() % cfg.mode_elements.size()];

    std::vector<std::string> candidates;
    collect_level(bundle.code_tree.roots, "", 0, level, candidates);
    std::sort(candidates.begin(), candidates.end());
    auto count = static_cast<std::size_t>(
        std::ceil(ratio * static_cast<double>(candidates.size())));
    if (count == 0 || candidates.empty())
        return apply_structure_break(bundle, f, {}, level, ratio);

    for (std::size_t i = 0; i < count; ++i) {
        std::size_t j = i + rng() % (candidates.size() - i);
        std::swap(candidates[i], candidates[j]);
    }
    candidates.resize(count);
    std::sort(candidates.begin(), candidates.end());
    return apply_structure_break(bundle, f, candidates, level, ratio);
}

std::string rewrite_occurrences(const std::string& line, const std::string& r,
                                const std::string& r_new) {
    if (r.empty()) throw std::invalid_argument("empty rewrite prefix");
    std::string out;
    out.reserve(line.size());
    std::size_t pos = 0;
    while (pos < line.size()) {
        auto hit = line.find(r, pos);
        if (hit == std::string::npos) {
            out.append(line, pos, std::string::npos);
            break;
        }
        bool start_ok = hit == 0 || !is_name_char(line[hit - 1]);
        std::size_t end = hit + r.size();
        char next = end < line.size() ? line[end] : '\0';
        bool end_ok = end == line.size() || next == '.' || next == '-' ||
                      std::isspace(static_cast<unsigned char>(next));
        out.append(line, pos, hit - pos);
        if (start_ok && end_ok) {
            out.append(r_new);
            pos = end;
        } else {
            out.push_back(line[hit]);
            pos = hit + 1;  // an overlapping occurrence may start inside
        }
    }
    return out;
}

std::vector<std::string> change_occurrences(const std::vector<std::string>& lines,
                                            const std::string& r,
                                            const std::string& r_new) {
    std::vector<std::string> out;
    out.reserve(lines.size());
    for (const auto& line : lines) out.push_back(rewrite_occurrences(line, r, r_new));
    return out;
}

AppBundle permission_perturb(const AppBundle& bundle,
                             const std::vector<std::string>& benign_profile,
                             int budget, std::uint64_t seed) {
    if (benign_profile.empty())
        throw std::invalid_argument("benign profile must be nonempty");
    AppBundle out = bundle;
    std::set<std::string> profile(benign_profile.begin(), benign_profile.end());

    std::vector<std::string> edits;  // "-PERM" drops, "+PERM" adds
    for (const auto& perm : out.manifest.permissions)
        if (!profile.contains(perm)) edits.push_back("-" + perm);
    for (const auto& perm : profile)
        if (!out.manifest.permissions.contains(perm)) edits.push_back("+" + perm);

    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i + 1 < edits.size(); ++i) {
        std::size_t j = i + rng() % (edits.size() - i);
        std::swap(edits[i], edits[j]);
    }
    int applied = 0;
    for (const auto& edit : edits) {
        if (applied >= budget) break;
        if (edit[0] == '-')
            out.manifest.permissions.erase(edit.substr(1));
        else
            out.manifest.permissions.insert(edit.substr(1));
        ++applied;
    }
    return out;
}

std::string attack_report_csv(const std::string& app_id,
                              const AttackOutcome& outcome,
                              AttackVariant variant) {
    std::ostringstream os;
    os << app_id << ',' << attack_variant_name(variant) << ','
       << family_name(outcome.element) << ',' << outcome.level << ','
       << outcome.ratio << ',';
    for (std::size_t i = 0; i < outcome.map.entries.size(); ++i) {
        if (i) os << ';';
        os << outcome.map.entries[i].first << "->" << outcome.map.entries[i].second;
    }
    os << '\n';
    return os.str();
}

}  // namespace droidmark
