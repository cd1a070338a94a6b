// External constrained-sum program speaking the subprocess wire protocol:
// one line of comma-separated canonical renderings on stdin, one canonical
// rendering on stdout. With --two it runs the faulty variant whose output
// constraint only triggers at sum >= 7.

#include <iostream>
#include <string>

#include "progderiv/sut.hpp"
#include "progderiv/value.hpp"

using namespace progderiv;

int main(int argc, char** argv) {
    bool variant_two = false;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--two") {
            variant_two = true;
        } else {
            std::cerr << "usage: sum-sut [--two]\n";
            return 2;
        }
    }

    std::string line;
    if (!std::getline(std::cin, line)) {
        std::cerr << "expected one input line\n";
        return 2;
    }
    try {
        const std::vector<Value> inputs = parse_wire_line(line);
        if (inputs.size() != 2 || !inputs[0].is_numeric() || !inputs[1].is_numeric()) {
            std::cerr << "expected two numeric inputs\n";
            return 2;
        }
        const double x = inputs[0].numeric();
        const double y = inputs[1].numeric();
        const Value out = variant_two ? constrained_sum_two(x, y) : constrained_sum_one(x, y);
        std::cout << canonical_bytes(out) << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }
}
