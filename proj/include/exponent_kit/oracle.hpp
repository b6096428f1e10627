#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "exponent_kit/channel.hpp"
#include "exponent_kit/source.hpp"

namespace exponent_kit {

/// Simplex lattice specification: masses are multiples of 1/resolution.
/// The cell guard keeps exhaustive enumeration at desk scale.
struct GridSpec {
    unsigned resolution = 60;
    unsigned max_cells = 9;

    GridSpec(unsigned n, unsigned cells = 9);
};

struct GridMinimum {
    double value;
    JointDist argmin;
};

// Exhaustive minimum of Theta over the lattice of joints; support-violating
// (infinite) lattice points are skipped, exact ties keep the
// lexicographically smallest joint.
GridMinimum grid_min_theta_channel(const SlopeParams& params, const ChannelProblem& prob,
                                   const GridSpec& grid);
GridMinimum grid_min_theta_source(const SlopeParams& params, const SourceProblem& prob,
                                  const GridSpec& grid);

struct AgreementRow {
    double lambda;
    double nu;
    std::vector<std::pair<std::string, double>> values;
    double max_deviation;
};

struct AgreementReport {
    std::vector<AgreementRow> rows;
    double tolerance;
    double max_deviation;
    bool pass;
};

// Runs every applicable algorithm at each slope point and tabulates the
// pairwise deviations. Endpoint slopes use the closed forms.
AgreementReport channel_agreement_report(const ChannelProblem& prob,
                                         const std::vector<SlopeParams>& grid,
                                         const StoppingRule& stop = StoppingRule::tight(),
                                         double tolerance = kTol.agreement);
AgreementReport source_agreement_report(const SourceProblem& prob,
                                        const std::vector<SlopeParams>& grid,
                                        const StoppingRule& stop = StoppingRule::tight(),
                                        double tolerance = kTol.agreement);

// True iff the trace objective is non-increasing within 1e-12 slack.
bool descent_audit(const IterationTrace& trace);

} // namespace exponent_kit
