#pragma once

#include "manifest.hpp"

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace toeplab::cli {

// Operators of a resolved manifest at truncation size N.
class Model {
public:
    explicit Model(const Config& c);

    Symbol h;  // Hamiltonian symbol: f, or f * factor for products

    Space space(int N) const;
    // T_h, Re(T_f T_factor) or L_h, without the perturbation
    OperatorMatrix base(int N) const;
    std::optional<OperatorMatrix> perturbation(int N) const;
    OperatorMatrix hamiltonian(int N) const;
    OperatorMatrix conjugate(int N) const;
    // Compression of the infinite-volume i[A, H]: L_{|grad f|^2} on a box, the commutator formula on the half-line
    OperatorMatrix commutator(int N) const;
    Symbol commutator_symbol() const;

private:
    const Config* c_;
};

// Runs every experiment of a resolved manifest and writes the artifacts into c.output.
// GuardError propagates after summary.txt has recorded the violation.
void run(const Config& c, std::ostream& log);

// %.17g, the CSV float format
std::string fmt17(double x);

}  // namespace toeplab::cli
