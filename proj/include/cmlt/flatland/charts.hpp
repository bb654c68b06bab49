// cmlt is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

#pragma once

#include "cmlt/cmh/chart.hpp"
#include "cmlt/flatland/scene.hpp"

namespace cmlt::flatland {

// Technique (s,t) = (1,1): uniform ground point plus an emitter point drawn
// by exact inverse-CDF of the scalar spatial emission. Classically
// invertible, so the reverse sampling space is empty.
class NeeChart final : public cmh::Chart<FlatPath> {
  public:
    explicit NeeChart(const FlatScene& scene) : scene_(&scene) {}

    int dim() const override { return 4; }
    int reverse_dim() const override { return 0; }
    FlatPath forward(std::span<const double> u) const override;
    double density(const FlatPath& p) const override;
    std::optional<std::vector<double>> invert(const FlatPath& p,
                                              std::span<const double> v) const override;

  private:
    const FlatScene* scene_;
};

// Technique (s,t) = (0,2): uniform ground point, cosine-distributed
// direction, x2 = first surface hit. Density is valid only when x2 is the
// first hit from x1.
class PtChart final : public cmh::Chart<FlatPath> {
  public:
    explicit PtChart(const FlatScene& scene) : scene_(&scene) {}

    int dim() const override { return 4; }
    int reverse_dim() const override { return 0; }
    FlatPath forward(std::span<const double> u) const override;
    double density(const FlatPath& p) const override;
    std::optional<std::vector<double>> invert(const FlatPath& p,
                                              std::span<const double> v) const override;

  private:
    const FlatScene* scene_;
};

}  // namespace cmlt::flatland
