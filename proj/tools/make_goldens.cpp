// Regenerates (or verifies) a fixture suite's frozen expected records.
//
//   ragjam_goldens <suite> [--check]
//
// Without --check, runs the evolutionary attack over the suite's scripted
// transcripts and rewrites <suite>/golden_records.jsonl. With --check, runs
// the same attack and compares the serialized records byte-for-byte against
// the frozen file, failing loudly on any drift.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "ragjam/error.hpp"
#include "ragjam/fixtures.hpp"
#include "ragjam/metrics.hpp"
#include "ragjam/runner.hpp"

namespace {

std::string serialize(const std::vector<ragjam::RunRecord>& records) {
    std::ostringstream out;
    for (const auto& rec : records)
        out << ragjam::run_record_to_json(rec).dump() << '\n';
    return out.str();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return {};
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

int main(int argc, char** argv) {
    using namespace ragjam;
    std::string suite_name;
    bool check = false;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--check")
            check = true;
        else if (suite_name.empty())
            suite_name = arg;
        else {
            std::cerr << "usage: ragjam_goldens <suite> [--check]\n";
            return 2;
        }
    }
    if (suite_name.empty()) {
        std::cerr << "usage: ragjam_goldens <suite> [--check]\n";
        return 2;
    }

    try {
        const FixtureSuite suite = load_fixture_suite(suite_name);
        Runner runner(suite.config);
        const auto records = runner.run_attacks(Provenance::deja);

        for (const auto& rec : records) {
            std::cout << rec.query_id << " run " << rec.run_index << ": "
                      << rec.trajectory.generations.size() << " generations, "
                      << termination_reason_name(rec.trajectory.termination)
                      << ", final_aus " << rec.final_aus << ", judge_calls "
                      << rec.judge_calls;
            if (rec.adv_rank) std::cout << ", adv_rank " << *rec.adv_rank;
            std::cout << '\n';
            for (const auto& g : rec.trajectory.generations) {
                std::cout << "  gen " << g.generation << ": best " << g.best_id
                          << " aus " << g.best_aus << " fitness "
                          << g.best_fitness << " ops {";
                bool first = true;
                for (const auto& [op, n] : g.operator_counts) {
                    std::cout << (first ? "" : ", ") << op << ":" << n;
                    first = false;
                }
                std::cout << "}\n";
            }
        }

        const std::string golden_path =
            (std::filesystem::path(suite.dir) / "golden_records.jsonl").string();
        const std::string fresh = serialize(records);
        if (check) {
            const std::string frozen = read_file(golden_path);
            if (frozen.empty()) {
                std::cerr << "no frozen records at " << golden_path << '\n';
                return 1;
            }
            if (frozen != fresh) {
                std::cerr << "drift: regenerated records differ from "
                          << golden_path << '\n';
                return 1;
            }
            std::cout << "records match " << golden_path << '\n';
            return 0;
        }
        std::ofstream out(golden_path, std::ios::binary | std::ios::trunc);
        out << fresh;
        if (!out) {
            std::cerr << "cannot write " << golden_path << '\n';
            return 1;
        }
        std::cout << "wrote " << records.size() << " record(s) to "
                  << golden_path << '\n';
        return 0;
    } catch (const Error& e) {
        std::cerr << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "io_failure: " << e.what() << '\n';
        return 1;
    }
}
