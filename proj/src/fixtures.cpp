#include "ragjam/fixtures.hpp"

#include <cstdlib>
#include <filesystem>

#include "ragjam/error.hpp"

namespace ragjam {

namespace fs = std::filesystem;

std::string fixture_root() {
    if (const char* env = std::getenv("RAGJAM_FIXTURES")) {
        fs::path p(env);
        if (fs::is_directory(p)) return p.string();
        throw Error(ErrorCode::io_failure,
                    std::string("RAGJAM_FIXTURES points at nothing usable: ") + env);
    }
    fs::path dir = fs::current_path();
    for (;;) {
        fs::path candidate = dir / "fixtures";
        if (fs::is_directory(candidate)) return candidate.string();
        if (dir == dir.root_path()) break;
        dir = dir.parent_path();
    }
    throw Error(ErrorCode::io_failure,
                "no fixtures/ directory found upward from " +
                    fs::current_path().string() + "; set RAGJAM_FIXTURES");
}

FixtureSuite load_fixture_suite(const std::string& name) {
    const fs::path root(fixture_root());
    const fs::path dir = root / "suites" / name;
    if (!fs::is_directory(dir))
        throw Error(ErrorCode::io_failure, "no fixture suite at " + dir.string());

    FixtureSuite suite;
    suite.name = name;
    suite.dir = dir.string();
    suite.config = load_config((dir / "config.json").string());

    // Suite configs give paths relative to the suite directory; a shared
    // corpus lives one level up under the fixture root.
    auto resolve = [&](std::string& path) {
        if (path.empty()) return;
        fs::path p(path);
        if (p.is_absolute()) return;
        if (fs::exists(dir / p)) path = (dir / p).string();
        else path = (root / p).string();
    };
    resolve(suite.config.corpus_path);
    resolve(suite.config.queries_path);
    resolve(suite.config.transcript_path);
    resolve(suite.config.index_path);

    suite.corpus = load_corpus(suite.config.corpus_path);
    suite.queries = load_queries(suite.config.queries_path);

    const fs::path golden = dir / "golden_records.jsonl";
    if (fs::exists(golden)) suite.golden = load_run_records(golden.string());
    return suite;
}

}  // namespace ragjam
