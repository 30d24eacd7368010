// Builds a small concept map by hand, runs a what-if scenario, and reports
// the target activation with its consonance.

#include <iostream>

#include "nfx/nfx.hpp"

int main() {
    using namespace nfx;

    fcm::ConceptMap map;
    map.concepts = {"demand", "competition", "sentiment", "price"};
    map.weights = linalg::Matrix(4, 4);
    map.weights(0, 3) = 0.7;   // demand pushes price up
    map.weights(1, 3) = -0.5;  // competition pushes price down
    map.weights(2, 0) = 0.6;   // sentiment drives demand
    map.weights(2, 3) = 0.3;
    map.steepness = 1.0;
    map.self_memory = 1.0;
    map.validate();

    const auto forecast =
        fcm::forecast(map, {{"sentiment", 0.9}, {"competition", 0.2}}, "price");
    std::cout << "price activation " << forecast.activation << ", consonance "
              << forecast.consonance << "\n";

    const auto state = fcm::event_encode(map, {{"sentiment", 0.9}});
    const auto result = fcm::run(map, state, 100, 1e-6);
    std::cout << "dynamics: " << fcm::to_string(result.classification) << " after "
              << result.trajectory.size() - 1 << " iterations\n";
    return 0;
}
