#include <ostream>

#include "dls/assignment.hpp"
#include "dls/format.hpp"

namespace dls {

void write_trace_csv(std::ostream& out, std::span<const ChunkGrant> trace) {
    out << "step,pe_id,start,size,grant_time\n";
    for (const auto& g : trace) {
        out << g.step << ',' << g.pe << ',' << g.start << ',' << g.size << ','
            << format_double(g.grant_time) << '\n';
    }
}

}  // namespace dls
