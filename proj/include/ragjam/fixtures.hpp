#pragma once

#include <string>
#include <vector>

#include "ragjam/config.hpp"
#include "ragjam/domain.hpp"
#include "ragjam/gateway.hpp"
#include "ragjam/metrics.hpp"

namespace ragjam {

// A self-contained replay scenario: corpus + queries + scripted transcripts
// + frozen expected run records. Everything uses the production file
// formats, so a suite is also a worked example of the input schemas.
struct FixtureSuite {
    std::string name;
    std::string dir;
    RunConfig config;
    std::vector<Document> corpus;
    std::vector<Query> queries;
    std::vector<RunRecord> golden;  // empty when the suite carries none
};

// Resolves the directory holding the fixture tree. Honors $RAGJAM_FIXTURES,
// then walks upward from the working directory looking for fixtures/.
std::string fixture_root();

FixtureSuite load_fixture_suite(const std::string& name);

}  // namespace ragjam
