#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "mquery/optimizer.hpp"
#include "mquery/pipeline.hpp"

namespace mquery {

// ---- generators ----

struct GenParams {
    std::uint64_t seed = 0;
    int max_docs = 5;
    int max_depth = 2;
    int max_fanout = 3;
    int key_alphabet = 3;
    int literal_pool = 6;
    int max_stages = 4;
};

enum class Family : std::uint8_t { Match, Unwind, Project, Group, Lookup, Union, GraphLookup, Sort, Limit, Skip, Count };
using FamilySet = std::set<Family>;

FamilySet core_families();
FamilySet all_families();
const char* family_name(Family f);
std::optional<Family> family_from_name(const std::string& name);

extern const char* const kMainCollection;      // "c0"
extern const char* const kExternalCollection;  // "c1"

class Generator {
public:
    explicit Generator(const GenParams& p);

    std::mt19937_64& rng() { return rng_; }
    const GenParams& params() const { return p_; }

    DValue value(int depth);
    DValue document(int id);
    DatabaseInstance instance();

    std::string key();
    Path path(bool index_free = true);
    TermPtr term(int depth, const std::vector<std::string>& scope = {});
    BoolPtr boolean(int depth, const std::vector<std::string>& scope = {});

    Stage stage(Family f, const std::vector<std::string>& scope = {});
    Stage stage_of_kind(Stage::Kind k, const std::vector<std::string>& scope = {});
    Query query(const FamilySet& families);

    // Document paths drawn by terms prefer this vocabulary when non-empty.
    void set_vocabulary(std::vector<Path> v) { vocab_ = std::move(v); }

    bool coin(double p);
    int uniform(int lo, int hi);  // inclusive

private:
    GenParams p_;
    std::mt19937_64 rng_;
    std::vector<Path> vocab_;
    int next_var_ = 0;

    PathRef ref(const std::vector<std::string>& scope);
    Query simple_subquery(const std::vector<std::string>& scope);
};

DatabaseInstance gen_instance(const GenParams& p);
Query gen_query(const GenParams& p, const FamilySet& families);

// A two-stage window satisfying a rule's precondition, the rewritten query and an instance.
struct RuleCase {
    std::string rule;
    Query before;
    Query after;
    std::vector<DatabaseInstance> instances;
};

std::optional<RuleCase> gen_rule_case(const std::string& rule, std::uint64_t seed, Mode mode,
                                      const GenParams& base = {});

// ---- equivalence ----

struct EquivReport {
    bool equal = true;
    Mode mode = Mode::Ordered;
    Query q1, q2;
    std::size_t instance_index = 0;
    DatabaseInstance instance;
    Collection left, right;
    DValue witness;  // first document whose multiplicities differ
    std::size_t left_count = 0, right_count = 0;
};

// Bag equality under mode-equality; on failure reports the smallest differing document.
bool bag_equal(const Collection& a, const Collection& b, Mode mode, DValue* witness = nullptr,
               std::size_t* a_count = nullptr, std::size_t* b_count = nullptr);

EquivReport check_equiv(const Query& q1, const Query& q2, const std::vector<DatabaseInstance>& instances, Mode mode);

DValue report_to_value(const EquivReport& r);
std::optional<EquivReport> report_from_value(const DValue& v);
// Re-runs a report's queries on its instance.
EquivReport replay_report(const EquivReport& r);

// ---- oracle ----

// Direct set-builder transcriptions of the stage semantics, for small inputs.
Collection oracle_eval_query(const DatabaseInstance& db, const Query& q, Mode mode);
Collection oracle_eval_stage(const DatabaseInstance& db, const Collection& in, const Stage& s, Mode mode);

// ---- golden corpus ----

struct GoldenCase {
    std::string name;
    std::vector<std::string> fixtures;
    std::string query_file;
    std::string expected_file;
    Mode mode = Mode::Ordered;
    std::string note;
};

struct GoldenResult {
    std::string name;
    bool passed = false;
    std::string detail;
    Collection actual;
    Collection expected;
};

std::vector<GoldenCase> load_golden_manifest(const std::string& corpus_dir, std::string& error);
GoldenResult run_golden_case(const std::string& corpus_dir, const GoldenCase& c);
std::vector<GoldenResult> run_golden_corpus(const std::string& corpus_dir);

// ---- rule fuzzing ----

struct RuleStats {
    std::string rule;
    std::size_t attempts = 0;
    std::size_t applied = 0;
    std::size_t verified = 0;
    std::vector<EquivReport> violations;
};

struct FuzzSummary {
    Mode mode = Mode::Ordered;
    std::uint64_t first_seed = 0;
    std::size_t seeds = 0;
    std::vector<RuleStats> rules;
    bool ok() const;
};

std::vector<std::string> rules_for_family(const std::string& family);  // "all" or a family name
FuzzSummary fuzz_rules(std::uint64_t first_seed, std::size_t seeds, const std::vector<std::string>& rules, Mode mode,
                       bool parallel = true);
DValue fuzz_to_value(const FuzzSummary& s);

// ---- file helpers ----

bool read_file(const std::string& path, std::string& out);

}  // namespace mquery
