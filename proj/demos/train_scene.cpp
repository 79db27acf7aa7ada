// Train the toy network on one procedural scene and print the loss
// curve. Finishes in a few seconds.

#include <cstdio>

#include "uhrseg/toynet.hpp"

int main() {
  using namespace uhrseg;
  SeededRng rng(11);
  const Scene scene = gen_scene<float>(64, 64, 4, rng);

  TwoBranchNet net(4);
  net.init_parameters(11017);
  std::printf("network: %zu parameters, 4 categories\n", net.parameter_count());

  TrainConfig cfg;
  cfg.iterations = 300;
  cfg.lr = 0.05;
  cfg.target_accuracy = 0.95;
  const auto history = train_on_scene(net, scene.image, scene.labels, cfg);

  for (std::size_t i = 0; i < history.size(); i += 20)
    std::printf("iter %3zu  total %.4f  seg %.4f  aux %.4f  wsl %.4f  acc %.3f\n", i,
                history[i].loss.total, history[i].loss.seg, history[i].loss.aux,
                history[i].loss.wsl, history[i].accuracy);
  std::printf("finished after %zu iterations at %.1f%% pixel accuracy\n", history.size(),
              100.0 * history.back().accuracy);
  return 0;
}
