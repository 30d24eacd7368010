// Trains the ANFIS forecaster and the regression baseline on a synthetic
// chaotic series and prints the comparison table.

#include <iostream>

#include "nfx/nfx.hpp"

int main() {
    using namespace nfx;

    const auto series = ts::synth_mackey_glass(1000, 7);
    const auto data = ts::make_windows(series, WindowSpec{4, 1});
    const auto split = ts::split_chrono(data, 0.6, 0.2, 0.2);

    std::vector<ts::CompareSpec> specs;
    for (const char* name : {"ols", "mlp", "anfis-hybrid"}) {
        ts::CompareSpec spec;
        spec.model = name;
        spec.iterations = 60;
        spec.seed = 7;
        specs.push_back(spec);
    }

    const auto rows = ts::compare(split.train, split.test, specs);
    std::cout << ts::render_compare_table(rows);
    return 0;
}
