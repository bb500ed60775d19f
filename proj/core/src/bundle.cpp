#include "droidmark/bundle.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace droidmark {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> split_dotted(const std::string& name) {
    std::vector<std::string> segs;
    std::string cur;
    for (char c : name) {
        if (c == '.') {
            segs.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    segs.push_back(cur);
    return segs;
}

bool valid_qualified_name(const std::string& name) {
    if (name.empty()) return false;
    for (const auto& seg : split_dotted(name)) {
        if (seg.empty()) return false;
        for (char c : seg) {
            if (c == '/' || c == '\\' || std::isspace(static_cast<unsigned char>(c)))
                return false;
        }
    }
    return true;
}

bool valid_dir_name(const std::string& name) {
    return !name.empty() && name.find('.') == std::string::npos &&
           name.find('/') == std::string::npos && name.find('\\') == std::string::npos;
}

int node_height(const DirNode& node) {
    int best = 0;
    for (const auto& child : node.children) best = std::max(best, node_height(child));
    return best + 1;
}

void sort_node(DirNode& node) {
    std::sort(node.children.begin(), node.children.end(),
              [](const DirNode& a, const DirNode& b) { return a.name < b.name; });
    std::sort(node.units.begin(), node.units.end(),
              [](const CodeUnit& a, const CodeUnit& b) { return a.name < b.name; });
    for (auto& child : node.children) sort_node(child);
}

// Resolves the directory chain `segs[0..n-1]`; nullptr if any hop is missing.
const DirNode* find_dir(const DirTree& tree, const std::vector<std::string>& segs) {
    const std::vector<DirNode>* level = &tree.roots;
    const DirNode* cur = nullptr;
    for (const auto& seg : segs) {
        cur = nullptr;
        for (const auto& node : *level) {
            if (node.name == seg) {
                cur = &node;
                break;
            }
        }
        if (!cur) return nullptr;
        level = &cur->children;
    }
    return cur;
}

// A reference is "owned" by the tree when its full directory path exists as
// a chain of directories; only then must the trailing unit name resolve.
// Names whose chain leaves the tree (android.util.Log against a bare
// `android` root) are external and unconstrained.
void check_reference(const DirTree& tree, const std::string& name,
                     const std::string& where, std::vector<std::string>& out) {
    if (!valid_qualified_name(name)) {
        out.push_back(where + ": malformed qualified name '" + name + "'");
        return;
    }
    auto segs = split_dotted(name);
    if (segs.size() < 2) return;
    std::vector<std::string> dir_segs(segs.begin(), segs.end() - 1);
    const DirNode* dir = find_dir(tree, dir_segs);
    if (!dir) return;  // external name
    const std::string& unit = segs.back();
    bool found = std::any_of(dir->units.begin(), dir->units.end(),
                             [&](const CodeUnit& u) { return u.name == unit; });
    if (!found)
        out.push_back(where + ": dangling reference '" + name + "'");
}

void check_node(const DirNode& node, const std::string& path_dotted,
                std::vector<std::string>& out) {
    if (!valid_dir_name(node.name))
        out.push_back("directory '" + path_dotted + "': invalid name");
    std::unordered_set<std::string> seen;
    for (const auto& child : node.children) {
        if (!seen.insert(child.name).second)
            out.push_back("directory '" + path_dotted + "': duplicate child '" +
                          child.name + "'");
    }
    std::unordered_set<std::string> unit_seen;
    for (const auto& unit : node.units) {
        if (!unit_seen.insert(unit.name).second)
            out.push_back("directory '" + path_dotted + "': duplicate unit '" +
                          unit.name + "'");
        std::string expected = path_dotted + "." + unit.name;
        if (unit.qualified_name != expected)
            out.push_back("unit '" + unit.qualified_name +
                          "': declared name does not match location '" + expected + "'");
    }
    for (const auto& child : node.children)
        check_node(child, path_dotted + "." + child.name, out);
}

[[noreturn]] void parse_fail(const fs::path& file, int line, const std::string& what) {
    throw ParseError(file.string() + ":" + std::to_string(line) + ": " + what);
}

CodeUnit parse_unit_file(const fs::path& file, const std::string& dir_dotted) {
    std::ifstream in(file);
    if (!in) throw ParseError("cannot open " + file.string());
    CodeUnit unit;
    unit.name = file.stem().string();
    std::string line;
    int lineno = 0;
    bool have_class = false;
    MethodDef* method = nullptr;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line.starts_with("class ")) {
            if (have_class) parse_fail(file, lineno, "duplicate class line");
            unit.qualified_name = line.substr(6);
            if (!valid_qualified_name(unit.qualified_name))
                parse_fail(file, lineno, "malformed class name");
            if (unit.qualified_name != dir_dotted + "." + unit.name)
                parse_fail(file, lineno, "class name does not match file location");
            have_class = true;
        } else if (line.starts_with("method ")) {
            if (!have_class) parse_fail(file, lineno, "method before class line");
            if (method) parse_fail(file, lineno, "method without endmethod");
            unit.methods.push_back({line.substr(7), {}});
            method = &unit.methods.back();
            if (method->name.empty()) parse_fail(file, lineno, "empty method name");
        } else if (line.starts_with("call ")) {
            if (!method) parse_fail(file, lineno, "call outside of a method");
            std::string rest = line.substr(5);
            auto arrow = rest.find("->");
            if (arrow == std::string::npos || arrow == 0 || arrow + 2 >= rest.size())
                parse_fail(file, lineno, "malformed call line");
            CallInstruction call{rest.substr(0, arrow), rest.substr(arrow + 2)};
            if (!valid_qualified_name(call.callee))
                parse_fail(file, lineno, "malformed callee name");
            method->calls.push_back(std::move(call));
        } else if (line == "endmethod") {
            if (!method) parse_fail(file, lineno, "endmethod without method");
            method = nullptr;
        } else {
            parse_fail(file, lineno, "unrecognized line '" + line + "'");
        }
    }
    if (method) throw ParseError(file.string() + ": missing endmethod");
    if (!have_class) throw ParseError(file.string() + ": missing class line");
    return unit;
}

DirNode parse_code_dir(const fs::path& dir, const std::string& dotted) {
    DirNode node;
    node.name = dir.filename().string();
    std::vector<fs::path> entries;
    for (const auto& e : fs::directory_iterator(dir)) entries.push_back(e.path());
    std::sort(entries.begin(), entries.end());
    for (const auto& p : entries) {
        if (fs::is_directory(p)) {
            node.children.push_back(parse_code_dir(p, dotted + "." + p.filename().string()));
        } else if (p.extension() == ".unit") {
            node.units.push_back(parse_unit_file(p, dotted));
        } else {
            throw ParseError("unexpected file in code tree: " + p.string());
        }
    }
    return node;
}

void write_unit(const CodeUnit& unit, const fs::path& file) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    out << "class " << unit.qualified_name << "\n";
    for (const auto& m : unit.methods) {
        out << "method " << m.name << "\n";
        for (const auto& c : m.calls) out << "call " << c.callee << "->" << c.method << "\n";
        out << "endmethod\n";
    }
}

void write_code_dir(const DirNode& node, const fs::path& dir) {
    fs::create_directories(dir);
    for (const auto& unit : node.units) write_unit(unit, dir / (unit.name + ".unit"));
    for (const auto& child : node.children) write_code_dir(child, dir / child.name);
}

}  // namespace

int DirTree::height() const {
    int best = 0;
    for (const auto& root : roots) best = std::max(best, node_height(root));
    return best;
}

void AppBundle::normalize() {
    std::sort(code_tree.roots.begin(), code_tree.roots.end(),
              [](const DirNode& a, const DirNode& b) { return a.name < b.name; });
    for (auto& root : code_tree.roots) sort_node(root);
    std::sort(layouts.begin(), layouts.end(),
              [](const LayoutFile& a, const LayoutFile& b) { return a.name < b.name; });
}

std::vector<std::string> check_integrity(const AppBundle& bundle) {
    std::vector<std::string> out;
    std::unordered_set<std::string> root_seen;
    for (const auto& root : bundle.code_tree.roots) {
        if (!root_seen.insert(root.name).second)
            out.push_back("code tree: duplicate root '" + root.name + "'");
        check_node(root, root.name, out);
    }
    for (const auto& comp : bundle.manifest.components) {
        if (!valid_qualified_name(comp))
            out.push_back("manifest: malformed component '" + comp + "'");
        else
            check_reference(bundle.code_tree, comp, "manifest component", out);
    }
    for (const auto& layout : bundle.layouts)
        for (const auto& ref : layout.refs)
            check_reference(bundle.code_tree, ref, "layout " + layout.name, out);

    // call instructions
    struct Walker {
        const AppBundle& b;
        std::vector<std::string>& out;
        void walk(const DirNode& node) {
            for (const auto& unit : node.units)
                for (const auto& m : unit.methods)
                    for (const auto& c : m.calls)
                        check_reference(b.code_tree, c.callee,
                                        "unit " + unit.qualified_name, out);
            for (const auto& child : node.children) walk(child);
        }
    } walker{bundle, out};
    for (const auto& root : bundle.code_tree.roots) walker.walk(root);
    return out;
}

AppBundle parse_bundle(const fs::path& path) {
    if (!fs::exists(path)) throw ParseError("no such bundle: " + path.string());
    AppBundle bundle;

    fs::path manifest = path / "manifest.txt";
    if (fs::exists(manifest)) {
        std::ifstream in(manifest);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            if (line.starts_with("permission: ")) {
                std::string perm = line.substr(12);
                if (perm.empty()) parse_fail(manifest, lineno, "empty permission");
                if (!bundle.manifest.permissions.insert(perm).second)
                    parse_fail(manifest, lineno, "duplicate permission '" + perm + "'");
            } else if (line.starts_with("component: ")) {
                std::string comp = line.substr(11);
                if (!valid_qualified_name(comp))
                    parse_fail(manifest, lineno, "malformed component name");
                bundle.manifest.components.push_back(comp);
            } else {
                parse_fail(manifest, lineno, "unrecognized line '" + line + "'");
            }
        }
    }

    fs::path layout_dir = path / "layout";
    if (fs::exists(layout_dir)) {
        std::vector<fs::path> entries;
        for (const auto& e : fs::directory_iterator(layout_dir)) entries.push_back(e.path());
        std::sort(entries.begin(), entries.end());
        for (const auto& p : entries) {
            LayoutFile layout;
            layout.name = p.stem().string();
            std::ifstream in(p);
            std::string line;
            int lineno = 0;
            while (std::getline(in, line)) {
                ++lineno;
                if (line.empty()) continue;
                if (!line.starts_with("ref: "))
                    parse_fail(p, lineno, "unrecognized line '" + line + "'");
                std::string ref = line.substr(5);
                if (!valid_qualified_name(ref))
                    parse_fail(p, lineno, "malformed reference");
                layout.refs.push_back(ref);
            }
            bundle.layouts.push_back(std::move(layout));
        }
    }

    fs::path code_dir = path / "code";
    if (fs::exists(code_dir)) {
        std::vector<fs::path> entries;
        for (const auto& e : fs::directory_iterator(code_dir)) entries.push_back(e.path());
        std::sort(entries.begin(), entries.end());
        for (const auto& p : entries) {
            if (!fs::is_directory(p))
                throw ParseError("unexpected file at code root: " + p.string());
            bundle.code_tree.roots.push_back(parse_code_dir(p, p.filename().string()));
        }
    }

    auto violations = check_integrity(bundle);
    if (!violations.empty())
        throw ParseError(path.string() + ": " + violations.front());
    return bundle;
}

void write_bundle(const AppBundle& bundle, const fs::path& path) {
    fs::create_directories(path);
    {
        std::ofstream out(path / "manifest.txt");
        if (!out) throw std::runtime_error("cannot write manifest under " + path.string());
        for (const auto& perm : bundle.manifest.permissions)
            out << "permission: " << perm << "\n";
        for (const auto& comp : bundle.manifest.components)
            out << "component: " << comp << "\n";
    }
    if (!bundle.layouts.empty()) {
        fs::create_directories(path / "layout");
        for (const auto& layout : bundle.layouts) {
            std::ofstream out(path / "layout" / (layout.name + ".txt"));
            for (const auto& ref : layout.refs) out << "ref: " << ref << "\n";
        }
    }
    fs::create_directories(path / "code");
    for (const auto& root : bundle.code_tree.roots)
        write_code_dir(root, path / "code" / root.name);
}

void CorpusSpec::validate() const {
    if (benign_count < 0 || malicious_count < 0)
        throw std::invalid_argument("corpus counts must be >= 0");
    if (min_height < 1 || max_height < min_height)
        throw std::invalid_argument("invalid height range");
    if (min_calls_per_method < 1 || max_calls_per_method < min_calls_per_method)
        throw std::invalid_argument("invalid calls-per-method range");
    if (general_self_weight_max < 0 || general_self_weight_max > 1 ||
        payload_fraction_min < 0 || payload_fraction_max > 1 ||
        payload_fraction_min > payload_fraction_max)
        throw std::invalid_argument("invalid call-profile knobs");
    if (malicious_stealth_prob < 0 || malicious_stealth_prob > 1)
        throw std::invalid_argument("malicious_stealth_prob must be in [0, 1]");
}

namespace {

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    // splitmix64 finalizer over the combined words
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

int rand_int(std::mt19937_64& rng, int lo, int hi) {  // inclusive
    return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

double rand_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

const std::vector<std::string>& word_pool() {
    static const std::vector<std::string> pool = {
        "core",  "data",  "media",  "store",  "sync",   "track", "view",
        "model", "cache", "engine", "render", "widget", "net",   "task"};
    return pool;
}

const std::vector<std::string>& class_pool() {
    static const std::vector<std::string> pool = {
        "Manager", "Handler", "Service", "Loader",  "Worker", "Helper",
        "Parser",  "Client",  "Adapter", "Monitor", "Bridge", "Filter"};
    return pool;
}

const std::vector<std::string>& api_method_pool() {
    static const std::vector<std::string> pool = {"run",  "init", "get",  "put",
                                                  "send", "open", "load", "close"};
    return pool;
}

// Known-family API names (the 9 prefixes of the family mode).
const std::vector<std::string>& known_prefix_pool() {
    static const std::vector<std::string> pool = {
        "android", "google", "java", "javax", "xml", "apache", "junit", "json", "dom"};
    return pool;
}

std::string make_api_name(std::mt19937_64& rng, const std::string& family) {
    const auto& words = word_pool();
    const auto& classes = class_pool();
    return family + "." + words[rng() % words.size()] + "." +
           classes[rng() % classes.size()];
}

struct GenContext {
    const CorpusSpec& spec;
    std::mt19937_64 rng;
    bool obfuscated = false;
    std::vector<std::string> unit_names;  // qualified, filled during build
    double payload_acc = 0.5;             // error accumulator for payload rounding
};

std::string gen_segment(GenContext& ctx) {
    if (ctx.obfuscated) {
        // single/double-letter segments only
        std::string s(1 + ctx.rng() % 2, 'a');
        for (auto& c : s) c = static_cast<char>('a' + ctx.rng() % 26);
        return s;
    }
    const auto& words = word_pool();
    return words[ctx.rng() % words.size()] + std::to_string(ctx.rng() % 10);
}

DirNode gen_dir(GenContext& ctx, const std::string& dotted, int remaining_height) {
    DirNode node;
    node.name = dotted.substr(dotted.rfind('.') + 1);
    int n_units = rand_int(ctx.rng, std::min(2, ctx.spec.max_units_per_dir),
                           ctx.spec.max_units_per_dir);
    for (int u = 0; u < n_units; ++u) {
        CodeUnit unit;
        unit.name = class_pool()[ctx.rng() % class_pool().size()] + std::to_string(u);
        unit.qualified_name = dotted + "." + unit.name;
        ctx.unit_names.push_back(unit.qualified_name);
        node.units.push_back(std::move(unit));
    }
    if (remaining_height > 1) {
        int n_children = rand_int(ctx.rng, 1, ctx.spec.max_subdirs);
        std::unordered_set<std::string> used;
        for (int c = 0; c < n_children; ++c) {
            std::string seg = gen_segment(ctx);
            while (!used.insert(seg).second) seg = gen_segment(ctx);
            node.children.push_back(gen_dir(ctx, dotted + "." + seg, remaining_height - 1));
        }
    }
    return node;
}

void fill_methods(GenContext& ctx, DirNode& node, double self_weight,
                  double payload_fraction,
                  const std::vector<std::vector<double>>& successor_weights) {
    for (auto& unit : node.units) {
        int n_methods = rand_int(ctx.rng, std::min(2, ctx.spec.max_methods_per_unit),
                                 ctx.spec.max_methods_per_unit);
        for (int m = 0; m < n_methods; ++m) {
            // Payload methods (malicious apps only) call nothing but the
            // app's own units. The fraction is realized by an error
            // accumulator so the per-app payload share is tight around the
            // drawn fraction even for small apps.
            ctx.payload_acc += payload_fraction;
            bool payload = ctx.payload_acc >= 1.0;
            if (payload) ctx.payload_acc -= 1.0;

            MethodDef method{"m" + std::to_string(m), {}};
            int n_calls = rand_int(ctx.rng, ctx.spec.min_calls_per_method,
                                   ctx.spec.max_calls_per_method);
            int last_fam = -1;  // a family call biases the next family choice
            for (int i = 0; i < n_calls; ++i) {
                if (payload || rand_unit(ctx.rng) < self_weight) {
                    const auto& target =
                        ctx.unit_names[ctx.rng() % ctx.unit_names.size()];
                    method.calls.push_back({target, "run"});
                    last_fam = -1;
                } else {
                    // After a family call, the next family follows the app's
                    // own successor profile for that family (an idiosyncratic
                    // per-app fingerprint). At a method start or after a self
                    // call, the family is drawn uniformly, so successors of
                    // self-state tokens are distributed identically across
                    // all apps.
                    std::size_t fam;
                    if (last_fam >= 0) {
                        const auto& dist =
                            successor_weights[static_cast<std::size_t>(last_fam)];
                        double r = rand_unit(ctx.rng);
                        fam = 0;
                        double acc = 0.0;
                        for (; fam + 1 < dist.size(); ++fam) {
                            acc += dist[fam];
                            if (r < acc) break;
                        }
                    } else {
                        fam = ctx.rng() % known_prefix_pool().size();
                    }
                    last_fam = static_cast<int>(fam);
                    method.calls.push_back(
                        {make_api_name(ctx.rng, known_prefix_pool()[fam]),
                         api_method_pool()[ctx.rng() % api_method_pool().size()]});
                }
            }
            unit.methods.push_back(std::move(method));
        }
    }
    for (auto& child : node.children)
        fill_methods(ctx, child, self_weight, payload_fraction, successor_weights);
}

AppBundle gen_app(const CorpusSpec& spec, Label label, int index) {
    GenContext ctx{spec,
                   std::mt19937_64(mix_seed(spec.seed,
                                            (label == Label::kMalicious ? 1u << 20 : 0u) +
                                                static_cast<std::uint64_t>(index)))};
    ctx.obfuscated = rand_unit(ctx.rng) < spec.obfuscated_prob;

    AppBundle app;
    int height = rand_int(ctx.rng, spec.min_height, spec.max_height);
    int n_roots = rand_int(ctx.rng, 1, 2);
    static const std::vector<std::string> root_pool = {"com", "org", "net", "app", "io"};
    std::unordered_set<std::string> used_roots;
    for (int r = 0; r < n_roots; ++r) {
        std::string root = ctx.obfuscated ? gen_segment(ctx)
                                          : root_pool[ctx.rng() % root_pool.size()];
        while (!used_roots.insert(root).second)
            root = ctx.obfuscated ? gen_segment(ctx)
                                  : root_pool[ctx.rng() % root_pool.size()];
        ctx.rng.discard(1);
        DirNode node = gen_dir(ctx, root, height);
        node.name = root;
        app.code_tree.roots.push_back(std::move(node));
    }

    // Per-app call profile: the same general mix for both classes (a small
    // self-call weight and a sparse bursty mix over 2..4 known families),
    // plus a payload-method fraction for non-stealthy malicious apps.
    bool stealthy = label == Label::kMalicious &&
                    rand_unit(ctx.rng) < spec.malicious_stealth_prob;
    double self_weight = rand_unit(ctx.rng) * spec.general_self_weight_max;
    double payload_fraction =
        label == Label::kMalicious && !stealthy
            ? spec.payload_fraction_min +
                  rand_unit(ctx.rng) *
                      (spec.payload_fraction_max - spec.payload_fraction_min)
            : 0.0;
    // Per-app successor profiles: the app favors a sparse random set of 2..4
    // families, and every family's successor distribution is an independent
    // skewed draw over that favored set. These fingerprints vary across apps
    // independently of the label.
    std::vector<std::size_t> favored;
    {
        int active = rand_int(ctx.rng, 2, 4);
        std::unordered_set<std::size_t> seen;
        for (int i = 0; i < active; ++i) {
            std::size_t fam = ctx.rng() % known_prefix_pool().size();
            if (seen.insert(fam).second) favored.push_back(fam);
        }
    }
    std::vector<std::vector<double>> successor_weights(known_prefix_pool().size());
    for (auto& row : successor_weights) {
        row.assign(known_prefix_pool().size(), 0.0);
        double row_total = 0.0;
        for (std::size_t g : favored) {
            double u = rand_unit(ctx.rng);
            row[g] = 0.02 + u * u * u * u;  // skewed toward a few favorites
            row_total += row[g];
        }
        for (auto& w : row) w /= row_total;
    }

    for (auto& root : app.code_tree.roots)
        fill_methods(ctx, root, self_weight, payload_fraction, successor_weights);

    // manifest: permission profile plus a few component references
    auto maybe = [&](const char* perm, double p) {
        if (rand_unit(ctx.rng) < p) app.manifest.permissions.insert(perm);
    };
    maybe("INTERNET", 0.90);
    maybe("ACCESS_NETWORK_STATE", 0.60);
    if (label == Label::kMalicious) {
        // correlated SMS suite: present (or absent) as a block
        if (rand_unit(ctx.rng) < spec.malicious_sms_prob) {
            app.manifest.permissions.insert("SEND_SMS");  // suite anchor
            maybe("READ_SMS", 0.92);
            maybe("RECEIVE_SMS", 0.80);
        }
        maybe("READ_CONTACTS", 0.55);
        maybe("WRITE_EXTERNAL_STORAGE", 0.45);
        maybe("CAMERA", 0.10);
    } else {
        if (rand_unit(ctx.rng) < spec.benign_sms_prob) {
            app.manifest.permissions.insert("SEND_SMS");
            maybe("READ_SMS", 0.60);
        }
        maybe("READ_CONTACTS", 0.15);
        maybe("CAMERA", 0.20);
        maybe("ACCESS_FINE_LOCATION", 0.25);
        maybe("WRITE_EXTERNAL_STORAGE", 0.30);
        maybe("VIBRATE", 0.15);
    }
    maybe("CUSTOM_VENDOR_HOOK", 0.01);  // rare custom permission, filtered out

    int n_components = rand_int(ctx.rng, 1, 3);
    for (int i = 0; i < n_components; ++i)
        app.manifest.components.push_back(
            ctx.unit_names[ctx.rng() % ctx.unit_names.size()]);

    int n_layouts = rand_int(ctx.rng, 1, 2);
    for (int i = 0; i < n_layouts; ++i) {
        LayoutFile layout;
        layout.name = "layout" + std::to_string(i);
        int n_refs = rand_int(ctx.rng, 1, 3);
        for (int r = 0; r < n_refs; ++r)
            layout.refs.push_back(ctx.unit_names[ctx.rng() % ctx.unit_names.size()]);
        app.layouts.push_back(std::move(layout));
    }

    app.normalize();
    return app;
}

}  // namespace

std::vector<std::pair<AppBundle, Label>> generate_corpus(const CorpusSpec& spec) {
    spec.validate();
    std::vector<std::pair<AppBundle, Label>> corpus;
    corpus.reserve(static_cast<std::size_t>(spec.benign_count + spec.malicious_count));
    for (int i = 0; i < spec.benign_count; ++i)
        corpus.emplace_back(gen_app(spec, Label::kBenign, i), Label::kBenign);
    for (int i = 0; i < spec.malicious_count; ++i)
        corpus.emplace_back(gen_app(spec, Label::kMalicious, i), Label::kMalicious);
    return corpus;
}

CorpusSpec parse_corpus_spec(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());
    CorpusSpec spec;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t\r") != std::string::npos)
                parse_fail(path, lineno, "expected key = value");
            continue;
        }
        auto trim = [](std::string s) {
            auto b = s.find_first_not_of(" \t\r");
            auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        try {
            if (!set_corpus_key(spec, key, value))
                parse_fail(path, lineno, "unknown key '" + key + "'");
        } catch (const std::invalid_argument&) {
            parse_fail(path, lineno, "bad value for '" + key + "'");
        }
    }
    spec.validate();
    return spec;
}

bool set_corpus_key(CorpusSpec& spec, const std::string& key,
                    const std::string& value) {
    if (key == "benign_count") spec.benign_count = std::stoi(value);
    else if (key == "malicious_count") spec.malicious_count = std::stoi(value);
    else if (key == "seed") spec.seed = std::stoull(value);
    else if (key == "min_height") spec.min_height = std::stoi(value);
    else if (key == "max_height") spec.max_height = std::stoi(value);
    else if (key == "max_subdirs") spec.max_subdirs = std::stoi(value);
    else if (key == "max_units_per_dir") spec.max_units_per_dir = std::stoi(value);
    else if (key == "max_methods_per_unit") spec.max_methods_per_unit = std::stoi(value);
    else if (key == "min_calls_per_method") spec.min_calls_per_method = std::stoi(value);
    else if (key == "max_calls_per_method") spec.max_calls_per_method = std::stoi(value);
    else if (key == "general_self_weight_max") spec.general_self_weight_max = std::stod(value);
    else if (key == "payload_fraction_min") spec.payload_fraction_min = std::stod(value);
    else if (key == "payload_fraction_max") spec.payload_fraction_max = std::stod(value);
    else if (key == "malicious_stealth_prob") spec.malicious_stealth_prob = std::stod(value);
    else if (key == "obfuscated_prob") spec.obfuscated_prob = std::stod(value);
    else if (key == "malicious_sms_prob") spec.malicious_sms_prob = std::stod(value);
    else if (key == "benign_sms_prob") spec.benign_sms_prob = std::stod(value);
    else return false;
    return true;
}

}  // namespace droidmark
