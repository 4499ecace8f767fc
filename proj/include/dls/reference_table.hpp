#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dls/technique.hpp"

namespace dls {

/// Reference chunk sizes for N=1000, P=4 (the published example table of chunk sizes).
struct ReferenceRow {
    Technique technique;
    std::vector<std::int64_t> chunks;  ///< empty when the row is not an oracle
    std::int64_t total_chunks = 0;
};

const std::vector<ReferenceRow>& reference_rows();

/// Parameters used to regenerate the table.
LoopDescriptor reference_loop();
TechniqueSpec reference_spec(Technique t);

enum class ReferenceCheck { Exact, Tolerance, PropertyOnly };

struct ReferenceResult {
    Technique technique = Technique::Static;
    ReferenceCheck check = ReferenceCheck::Exact;
    bool passed = false;
    std::vector<std::int64_t> expected;
    std::vector<std::int64_t> got;
    std::vector<std::string> mismatches;  ///< "step i: expected x, got y"
    std::string note;
};

struct ReferenceReport {
    std::vector<ReferenceResult> results;
    bool passed() const;
};

ReferenceReport verify_reference_table();
void print_reference_report(std::ostream& out, const ReferenceReport& report);

}  // namespace dls
