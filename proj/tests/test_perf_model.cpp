#include <doctest.h>

#include "oisa/perf_model.hpp"

using namespace oisa;

namespace {

struct Fixture {
    CoreConfig cfg;
    LayerSpec layer;
    Schedule sched;
    std::vector<WeightMap> maps;

    explicit Fixture(int out_channels = 400) {
        layer.kernel = 3;
        layer.in_height = 3;
        layer.in_width = 3;
        layer.out_channels = out_channels;
        sched = plan_layer(layer, cfg);
        std::vector<KernelWeights> kernels(std::size_t(out_channels),
                                           KernelWeights(9, make_weight(3)));
        for (int r = 0; r < sched.remap_count; ++r)
            maps.push_back(map_weights(sched, r, kernels, cfg));
    }
};

} // namespace

TEST_CASE("estimate: one cycle with zero tuning latency costs exactly t_mac") {
    Fixture f;
    f.cfg.mr_tuning.to_step_latency = 0.0;
    f.cfg.mr_tuning.eo_step_latency = 0.0;
    f.maps.clear();
    std::vector<KernelWeights> kernels(400, KernelWeights(9, make_weight(3)));
    f.maps.push_back(map_weights(f.sched, 0, kernels, f.cfg));

    TimingEnergyConstants c;
    c.t_mac = 55.8e-12;
    PerfReport r = estimate(f.sched, f.maps, c, f.cfg);
    CHECK(r.latency == doctest::Approx(55.8e-12).epsilon(1e-12));
    CHECK(r.compute_latency == doctest::Approx(55.8e-12).epsilon(1e-12));
    CHECK(r.tuning_latency == 0.0);
}

TEST_CASE("estimate: single BPD event dominates the breakdown") {
    CoreConfig cfg;
    Schedule s;
    s.layer.kernel = 3;
    s.layer.in_height = 3;
    s.layer.in_width = 3;
    s.layer.out_channels = 1;
    s.shape = kernel_shape(s.layer, cfg);
    s.num_banks = cfg.num_banks;
    s.arms_per_bank = cfg.arms_per_bank;
    s.rounds = {Round{0, 1}};
    s.cycles_per_round = 1;
    s.total_cycles = 1;
    s.total_macs = 9;
    s.remap_count = 1;

    TimingEnergyConstants c;
    c.e_bpd_detect = 3.5e-12;
    std::vector<WeightMap> maps(1); // empty map: no tuning events
    PerfReport r = estimate(s, maps, c, cfg);
    CHECK(r.total_energy == doctest::Approx(3.5e-12));
    CHECK(r.energy_breakdown.at("bpd") == doctest::Approx(3.5e-12));
    for (const auto& [name, e] : r.energy_breakdown)
        if (name != "bpd") CHECK(e == 0.0);
}

TEST_CASE("estimate: breakdown sums to the total exactly") {
    Fixture f;
    TimingEnergyConstants c;
    c.e_vcsel_emission = 1.1e-13;
    c.e_bpd_detect = 2.3e-13;
    c.e_awc_convert = 3.7e-14;
    c.e_kernel_read = 5.0e-15;
    c.e_vom = 7.7e-14;
    c.e_mr_to_step = 3.0e-11;
    c.e_mr_eo_step = 1.0e-15;
    c.p_static = 1e-3;
    PerfReport r = estimate(f.sched, f.maps, c, f.cfg);
    double sum = 0.0;
    for (const auto& [name, e] : r.energy_breakdown) sum += e;
    CHECK(r.total_energy == doctest::Approx(sum).epsilon(1e-12));
    CHECK(r.total_energy > 0.0);
}

TEST_CASE("estimate: efficiency equals throughput over power") {
    Fixture f;
    TimingEnergyConstants c;
    c.e_vcsel_emission = 2e-13;
    c.p_static = 5e-4;
    PerfReport r = estimate(f.sched, f.maps, c, f.cfg);
    CHECK(r.efficiency == doctest::Approx(r.throughput / r.average_power).epsilon(1e-12));
}

TEST_CASE("estimate: monotone in constants") {
    Fixture f;
    TimingEnergyConstants base;
    base.e_vcsel_emission = 1e-13;
    base.e_bpd_detect = 1e-13;
    PerfReport r0 = estimate(f.sched, f.maps, base, f.cfg);

    for (double TimingEnergyConstants::*field :
         {&TimingEnergyConstants::e_vcsel_emission, &TimingEnergyConstants::e_bpd_detect,
          &TimingEnergyConstants::e_awc_convert, &TimingEnergyConstants::e_kernel_read,
          &TimingEnergyConstants::e_vom, &TimingEnergyConstants::e_mr_to_step,
          &TimingEnergyConstants::e_mr_eo_step}) {
        TimingEnergyConstants c = base;
        c.*field += 1e-13;
        PerfReport r = estimate(f.sched, f.maps, c, f.cfg);
        CHECK(r.total_energy >= r0.total_energy);
    }

    TimingEnergyConstants slower = base;
    slower.t_mac *= 2.0;
    CHECK(estimate(f.sched, f.maps, slower, f.cfg).latency >= r0.latency);
}

TEST_CASE("estimate: zero-work schedule has zero dynamic energy") {
    CoreConfig cfg;
    Schedule s;
    s.layer.kernel = 3;
    s.layer.in_height = 3;
    s.layer.in_width = 3;
    s.shape = kernel_shape(s.layer, cfg);
    s.num_banks = cfg.num_banks;
    s.arms_per_bank = cfg.arms_per_bank;
    // no rounds, no cycles
    TimingEnergyConstants c;
    c.e_vcsel_emission = 1e-13;
    PerfReport r = estimate(s, {}, c, cfg);
    CHECK(r.total_energy == 0.0);
    CHECK(r.latency == 0.0);
}

TEST_CASE("estimate: scaling all energies by c divides efficiency by c") {
    Fixture f;
    TimingEnergyConstants c1;
    c1.e_vcsel_emission = 1e-13;
    c1.e_bpd_detect = 2e-13;
    c1.e_mr_to_step = 3e-11;
    c1.e_mr_eo_step = 1e-15;
    c1.p_static = 1e-4;
    PerfReport r1 = estimate(f.sched, f.maps, c1, f.cfg);

    double k = 3.0;
    TimingEnergyConstants c2 = c1;
    c2.e_vcsel_emission *= k;
    c2.e_bpd_detect *= k;
    c2.e_awc_convert *= k;
    c2.e_kernel_read *= k;
    c2.e_vom *= k;
    c2.e_mr_to_step *= k;
    c2.e_mr_eo_step *= k;
    c2.p_static *= k;
    PerfReport r2 = estimate(f.sched, f.maps, c2, f.cfg);
    CHECK(r2.efficiency == doctest::Approx(r1.efficiency / k).epsilon(1e-12));
}

TEST_CASE("frame_rate: reciprocal of total frame latency") {
    PerfReport r;
    r.latency = 1e-3;
    TimingEnergyConstants c;
    CHECK(frame_rate(r, c) == doctest::Approx(1000.0));

    c.t_exposure = 0.5e-3;
    c.t_readout = 0.5e-3;
    CHECK(frame_rate(r, c) == doctest::Approx(500.0));
}

TEST_CASE("frame_rate: doubling t_mac halves the compute-bound component") {
    Fixture f;
    f.cfg.mr_tuning.to_step_latency = 0.0;
    f.cfg.mr_tuning.eo_step_latency = 0.0;
    std::vector<KernelWeights> kernels(400, KernelWeights(9, make_weight(3)));
    std::vector<WeightMap> maps{map_weights(f.sched, 0, kernels, f.cfg)};

    TimingEnergyConstants c;
    PerfReport r1 = estimate(f.sched, maps, c, f.cfg);
    TimingEnergyConstants c2 = c;
    c2.t_mac *= 2.0;
    PerfReport r2 = estimate(f.sched, maps, c2, f.cfg);
    CHECK(r2.compute_latency == doctest::Approx(2.0 * r1.compute_latency));
}

TEST_CASE("frame_rate: rejects zero latency") {
    PerfReport r;
    TimingEnergyConstants c;
    CHECK_THROWS_AS(frame_rate(r, c), sim_error);
}
