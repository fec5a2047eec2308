#ifndef OISA_MAPPER_HPP
#define OISA_MAPPER_HPP

#include <cstdint>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "oisa/common.hpp"
#include "oisa/core_config.hpp"
#include "oisa/device_models.hpp"
#include "oisa/opc.hpp"

namespace oisa {

enum class LayerKind { conv, mlp };

struct LayerSpec {
    LayerKind kind = LayerKind::conv;
    int in_height = 1;
    int in_width = 1;
    int in_channels = 1;
    int kernel = 3; // K for conv, fan-in for mlp
    int out_channels = 1;
    int stride = 1;
    int padding = 0;

    int out_height() const {
        if (kind == LayerKind::mlp) return 1;
        return (in_height + 2 * padding - kernel) / stride + 1;
    }
    int out_width() const {
        if (kind == LayerKind::mlp) return 1;
        return (in_width + 2 * padding - kernel) / stride + 1;
    }
    int out_positions() const { return out_height() * out_width(); }
    // one 2-D kernel instance per (output channel, input channel) pair
    int kernel_instances() const {
        return kind == LayerKind::conv ? out_channels * in_channels : out_channels;
    }
    int macs_per_instance_position() const {
        return kind == LayerKind::conv ? kernel * kernel : kernel;
    }

    void validate() const {
        require(in_height >= 1 && in_width >= 1 && in_channels >= 1 && out_channels >= 1 &&
                    stride >= 1 && padding >= 0 && kernel >= 1,
                errc::invalid_argument, "LayerSpec: all dims must be >= 1");
        if (kind == LayerKind::conv) {
            require(kernel == 3 || kernel == 5 || kernel == 7, errc::invalid_argument,
                    "LayerSpec: unsupported kernel size (K in {3,5,7})");
            require(out_height() >= 1 && out_width() >= 1, errc::invalid_argument,
                    "LayerSpec: zero output geometry");
        }
    }
};

/// MACs the core can issue per cycle: f*(n*K^2) with n=5 for K=3 (five 3x3
/// kernels per bank) and n=1 for K=5,7 (one kernel per bank).
inline long long macs_per_cycle(int num_banks, int kernel_size) {
    require(num_banks >= 1, errc::invalid_argument, "macs_per_cycle: f >= 1");
    require(kernel_size == 3 || kernel_size == 5 || kernel_size == 7, errc::invalid_argument,
            "macs_per_cycle: unsupported kernel size");
    long long n = kernel_size == 3 ? 5 : 1;
    return (long long)num_banks * n * kernel_size * kernel_size;
}

/// How one kernel instance occupies a bank: which arms, how many slots each.
struct KernelShape {
    std::vector<int> arm_slots; // elements per arm, in arm order
    bool spare_slot_reserved = true;
    int kernels_per_bank = 1;

    int arms() const { return int(arm_slots.size()); }
    int total_slots() const { return std::accumulate(arm_slots.begin(), arm_slots.end(), 0); }
};

inline KernelShape kernel_shape(const LayerSpec& layer, const CoreConfig& cfg) {
    KernelShape s;
    if (layer.kind == LayerKind::conv) {
        switch (layer.kernel) {
        case 3:
            s.arm_slots = {9};
            s.spare_slot_reserved = true;
            s.kernels_per_bank = cfg.arms_per_bank;
            break;
        case 5:
            // 25 weights across 3 arms; spare-slot rule lifted for large kernels
            s.arm_slots = {9, 9, 7};
            s.spare_slot_reserved = false;
            s.kernels_per_bank = 1;
            break;
        case 7:
            // 49 weights need all 10 slots of four arms plus 9 on the fifth
            s.arm_slots = {10, 10, 10, 10, 9};
            s.spare_slot_reserved = false;
            s.kernels_per_bank = 1;
            break;
        default:
            fail(errc::invalid_argument, "kernel_shape: unsupported kernel size");
        }
    } else {
        // fan-in splits into 9-element chunks reduced by the VOM
        int chunk = cfg.usable_slots(true);
        int fan_in = layer.kernel;
        s.spare_slot_reserved = true;
        s.kernels_per_bank = 0; // arms allocate across bank boundaries
        while (fan_in > 0) {
            s.arm_slots.push_back(std::min(chunk, fan_in));
            fan_in -= std::min(chunk, fan_in);
        }
    }
    return s;
}

struct Round {
    int first_instance = 0;
    int instance_count = 0;
};

/// Immutable execution plan for one layer. The cycle plan is implicit: each
/// round holds its resident kernel instances for every output position in
/// raster order, one position per cycle.
struct Schedule {
    LayerSpec layer;
    KernelShape shape;
    int num_banks = 0;
    int arms_per_bank = 0;
    std::vector<Round> rounds;

    long long cycles_per_round = 0;
    long long total_cycles = 0;
    long long total_macs = 0;
    int remap_count = 0;
    long long idle_arm_cycles = 0;
    double utilization = 0.0;

    // capacity: kernel instances resident per full core load
    int capacity() const {
        if (layer.kind == LayerKind::conv) return num_banks * shape.kernels_per_bank;
        return (num_banks * arms_per_bank) / shape.arms();
    }

    // flat arm index of instance `slot_in_round`'s first arm
    int first_arm_flat(int slot_in_round) const {
        if (layer.kind == LayerKind::conv && layer.kernel == 3) return slot_in_round;
        if (layer.kind == LayerKind::conv) return slot_in_round * arms_per_bank;
        return slot_in_round * shape.arms();
    }
};

inline Schedule plan_layer(const LayerSpec& layer, const CoreConfig& cfg) {
    layer.validate();
    cfg.validate();
    Schedule s;
    s.layer = layer;
    s.shape = kernel_shape(layer, cfg);
    s.num_banks = cfg.num_banks;
    s.arms_per_bank = cfg.arms_per_bank;
    require(s.shape.total_slots() == layer.macs_per_instance_position() ||
                layer.kind == LayerKind::mlp,
            errc::internal, "plan_layer: shape does not cover the kernel");

    int instances = layer.kernel_instances();
    int cap = s.capacity();
    require(cap >= 1, errc::invalid_argument, "plan_layer: kernel does not fit the core");

    for (int first = 0; first < instances; first += cap) {
        Round r;
        r.first_instance = first;
        r.instance_count = std::min(cap, instances - first);
        s.rounds.push_back(r);
    }
    s.remap_count = int(s.rounds.size());
    s.cycles_per_round = layer.out_positions();
    s.total_cycles = s.cycles_per_round * s.remap_count;
    s.total_macs = (long long)instances * layer.out_positions() *
                   layer.macs_per_instance_position();

    long long active_arm_cycles = 0;
    for (const Round& r : s.rounds)
        active_arm_cycles += (long long)r.instance_count * s.shape.arms() * s.cycles_per_round;
    long long total_arm_cycles = (long long)s.num_banks * s.arms_per_bank * s.total_cycles;
    s.idle_arm_cycles = total_arm_cycles - active_arm_cycles;

    long long per_cycle_cap = layer.kind == LayerKind::conv
                                  ? macs_per_cycle(cfg.num_banks, layer.kernel)
                                  : (long long)cap * layer.kernel;
    s.utilization = per_cycle_cap > 0
                        ? double(s.total_macs) / (double(s.total_cycles) * double(per_cycle_cap))
                        : 0.0;
    return s;
}

// ---------------------------------------------------------------------------
// Weight mapping
// ---------------------------------------------------------------------------

struct MrAssignment {
    int kernel_instance = 0;
    int bank = 0;
    int arm = 0;  // arm index within the bank
    int slot = 0;
    int rail_sign = +1; // +1 positive waveguide, -1 negative
    int level = 0;      // tuning level = weight magnitude
};

struct WeightMap {
    std::vector<MrAssignment> assignments;
    double tuning_energy = 0.0;
    double tuning_latency = 0.0;
};

/// Flattened kernel weights for one instance, length K*K (conv) or fan-in (mlp).
using KernelWeights = std::vector<QuantWeight>;

/// Lay one round's kernels onto MRs. Every assigned weight produces one
/// (bank, arm, slot, rail, level) tuple; zero weights sit at level 0 on the
/// positive rail. Tuning serializes in groups of awc_units_per_row parallel
/// converters; each group's latency is its slowest tune.
inline WeightMap map_weights(const Schedule& sched, int round_index,
                             const std::vector<KernelWeights>& kernels, const CoreConfig& cfg) {
    require(round_index >= 0 && round_index < int(sched.rounds.size()), errc::invalid_argument,
            "map_weights: round out of range");
    const Round& round = sched.rounds[round_index];
    WeightMap wm;

    for (int k = 0; k < round.instance_count; ++k) {
        int instance = round.first_instance + k;
        require(instance < int(kernels.size()), errc::invalid_argument,
                "map_weights: missing kernel weights");
        const KernelWeights& w = kernels[instance];
        require(int(w.size()) == sched.layer.macs_per_instance_position(), errc::invalid_argument,
                "map_weights: kernel size mismatch");

        int flat_arm = sched.first_arm_flat(k);
        std::size_t wi = 0;
        for (int a = 0; a < sched.shape.arms(); ++a) {
            int arm_flat = flat_arm + a;
            int bank = arm_flat / sched.arms_per_bank;
            int arm = arm_flat % sched.arms_per_bank;
            require(bank < sched.num_banks, errc::invalid_argument,
                    "map_weights: geometry overflow");
            int slots = a < int(sched.shape.arm_slots.size()) ? sched.shape.arm_slots[a] : 0;
            for (int slot = 0; slot < slots && wi < w.size(); ++slot, ++wi) {
                const QuantWeight& qw = w[wi];
                require(qw.magnitude <= cfg.weight_full_scale(), errc::invalid_argument,
                        "map_weights: weight magnitude overflows bit-width");
                MrAssignment asg;
                asg.kernel_instance = instance;
                asg.bank = bank;
                asg.arm = arm;
                asg.slot = slot;
                asg.rail_sign = qw.magnitude > 0 ? qw.sign : +1;
                asg.level = qw.magnitude;
                wm.assignments.push_back(asg);
            }
        }
        require(wi == w.size(), errc::internal, "map_weights: weights left unassigned");
    }

    // cost: AWC rows program 40 MRs at a time
    std::size_t i = 0;
    while (i < wm.assignments.size()) {
        std::size_t group_end = std::min(i + std::size_t(cfg.awc_units_per_row),
                                         wm.assignments.size());
        double group_latency = 0.0;
        for (; i < group_end; ++i) {
            TuneResult t = tune_mr(wm.assignments[i].level, cfg.weight_bits(), cfg.mr,
                                   cfg.mr_tuning);
            wm.tuning_energy += t.energy;
            group_latency = std::max(group_latency, t.latency);
        }
        wm.tuning_latency += group_latency;
    }
    return wm;
}

// ---------------------------------------------------------------------------
// Cycle-step construction
// ---------------------------------------------------------------------------

/// Input pixel coordinates feeding each slot of an instance at one output
/// position. For conv the instance reads its own input channel's plane; the
/// caller selects the plane via instance_channel().
inline std::vector<std::pair<int, int>> stride_coords(const LayerSpec& layer, int ox, int oy) {
    std::vector<std::pair<int, int>> coords;
    if (layer.kind == LayerKind::conv) {
        coords.reserve(std::size_t(layer.kernel) * layer.kernel);
        int x0 = ox * layer.stride - layer.padding;
        int y0 = oy * layer.stride - layer.padding;
        for (int ky = 0; ky < layer.kernel; ++ky)
            for (int kx = 0; kx < layer.kernel; ++kx)
                coords.emplace_back(x0 + kx, y0 + ky);
    } else {
        coords.reserve(std::size_t(layer.kernel));
        for (int i = 0; i < layer.kernel; ++i)
            coords.emplace_back(i % layer.in_width, i / layer.in_width);
    }
    return coords;
}

inline int instance_out_channel(const LayerSpec& layer, int instance) {
    return layer.kind == LayerKind::conv ? instance / layer.in_channels : instance;
}
inline int instance_in_channel(const LayerSpec& layer, int instance) {
    return layer.kind == LayerKind::conv ? instance % layer.in_channels : 0;
}

/// Build the core jobs for one (round, output position) cycle.
inline CycleStep make_cycle_step(const Schedule& sched, int round_index, int position_index,
                                 const std::vector<KernelWeights>& kernels) {
    require(round_index >= 0 && round_index < int(sched.rounds.size()), errc::invalid_argument,
            "make_cycle_step: round out of range");
    require(position_index >= 0 && position_index < sched.cycles_per_round,
            errc::invalid_argument, "make_cycle_step: position out of range");
    const Round& round = sched.rounds[round_index];
    int ox = position_index % sched.layer.out_width();
    int oy = position_index / sched.layer.out_width();

    CycleStep step;
    step.jobs.reserve(std::size_t(round.instance_count));
    for (int k = 0; k < round.instance_count; ++k) {
        int instance = round.first_instance + k;
        const KernelWeights& w = kernels[instance];
        auto coords = stride_coords(sched.layer, ox, oy);
        require(coords.size() == w.size(), errc::invalid_argument,
                "make_cycle_step: kernel size mismatch");

        KernelJob job;
        job.kernel_instance = instance;
        job.out_x = ox;
        job.out_y = oy;
        int flat_arm = sched.first_arm_flat(k);
        job.bank = flat_arm / sched.arms_per_bank;
        job.first_arm = flat_arm % sched.arms_per_bank;
        job.spare_slot_reserved = sched.shape.spare_slot_reserved;

        std::size_t wi = 0;
        for (int a = 0; a < sched.shape.arms() && wi < w.size(); ++a) {
            int slots = sched.shape.arm_slots[a];
            std::vector<std::pair<int, int>> ac;
            std::vector<QuantWeight> aw;
            for (int slot = 0; slot < slots && wi < w.size(); ++slot, ++wi) {
                ac.push_back(coords[wi]);
                aw.push_back(w[wi]);
            }
            job.arm_coords.push_back(std::move(ac));
            job.arm_weights.push_back(std::move(aw));
        }
        step.jobs.push_back(std::move(job));
    }
    return step;
}

// ---------------------------------------------------------------------------
// Serialization (versioned text, used by inspect and golden-file tests)
// ---------------------------------------------------------------------------

inline void write_schedule(std::ostream& os, const Schedule& s) {
    os << "oisa-schedule v1\n";
    os << "layer " << (s.layer.kind == LayerKind::conv ? "conv" : "mlp") << " in "
       << s.layer.in_height << "x" << s.layer.in_width << "x" << s.layer.in_channels << " k "
       << s.layer.kernel << " out_ch " << s.layer.out_channels << " stride " << s.layer.stride
       << " pad " << s.layer.padding << "\n";
    os << "geometry banks " << s.num_banks << " arms_per_bank " << s.arms_per_bank
       << " arms_per_kernel " << s.shape.arms() << " kernels_per_bank "
       << s.shape.kernels_per_bank << "\n";
    os << "counters cycles " << s.total_cycles << " macs " << s.total_macs << " remaps "
       << s.remap_count << " idle_arm_cycles " << s.idle_arm_cycles << " utilization "
       << s.utilization << "\n";
    for (std::size_t i = 0; i < s.rounds.size(); ++i)
        os << "round " << i << " instances " << s.rounds[i].first_instance << ".."
           << (s.rounds[i].first_instance + s.rounds[i].instance_count - 1) << "\n";
}

inline std::string schedule_to_string(const Schedule& s) {
    std::ostringstream os;
    write_schedule(os, s);
    return os.str();
}

} // namespace oisa

#endif
