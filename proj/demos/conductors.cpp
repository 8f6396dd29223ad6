// Prints Swan/Artin conductors of AS(b s^-d) next to Kato's values.
#include <iostream>

#include <diffcond/diffmod.hpp>
#include <diffcond/extensions.hpp>
#include <diffcond/parse.hpp>

using namespace diffcond;

int main() {
    for (int p : {2, 3, 5}) {
        const KappaCtx k(p, std::vector<std::string>{"b"});
        const CohenCtx c(p, 8, k);
        std::cout << "p = " << p << "\n";
        for (int d = 1; d <= 9; ++d) {
            ASWData f = as_reduce(parse_datum("b*s^-" + std::to_string(d), k)).reduced;
            DiffModule M = as_module(f, c);
            Conductors cd = conductors(M);
            std::cout << "  d=" << d << "  swan " << to_string(cd.swan) << "  artin " << to_string(cd.artin)
                      << "  kato " << kato_swan(f) << "/" << kato_artin(f) << "  dominant(nonlog) {";
            bool first = true;
            for (int j : dominant_ops(M, false)) {
                std::cout << (first ? "" : ",") << j;
                first = false;
            }
            std::cout << "}\n";
        }
    }
}
