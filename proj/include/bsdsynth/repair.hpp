/* bsdsynth: oracle-guided combinational logic synthesis
 * Copyright (C) 2026 bsdsynth contributors */

/*!
  \file repair.hpp
  \brief The module-generation feedback loop: verify, locate, expand, repeat

  One repair cycle draws fresh samples into a cumulative cache, simulates the
  diagram on the cache, and Shannon-expands the speculative leaves reached by
  mismatching samples until the cache is fully fit (or a budget binds).  Each
  expansion pass touches every distinct faulty leaf at most once, in order of
  descending mismatch count (ties by node id); child guesses follow the
  configured policy over the cached samples falling in each cofactor, so a
  pass never decreases accuracy on the cache it was computed from.

  Sample sourcing depends on the target:
   - Exhaustive100 verifies against the full enumeration every cycle (a fast
     range sweep over a permuted truth table) and feeds the discovered
     counterexamples back as the next cycle's samples;
   - SampleAccuracy draws uniform seeded batches and converges when a fresh
     batch meets the threshold before any repair;
   - Statistical draws uniform batches, then runs an all-pass check of
     n = ceil(ln(1/(1-confidence)) / max_error) fresh samples; failures are
     fed back as counterexamples.

  On convergence the surviving speculative leaves are promoted to constants
  and the diagram is reduced.
*/

#pragma once

#include "bsd.hpp"
#include "builtins.hpp"
#include "netlist.hpp"
#include "oracle.hpp"
#include "rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace bsdsynth
{

/* ------------------------------------------------------------------ */
/* configuration                                                       */
/* ------------------------------------------------------------------ */

struct repair_target
{
  enum class kind : uint8_t
  {
    exhaustive100,
    sample_accuracy,
    statistical
  };

  kind mode = kind::exhaustive100;
  double threshold = 1.0;   /* sample_accuracy */
  double confidence = 0.99; /* statistical */
  double max_error = 0.001; /* statistical */

  static repair_target exhaustive()
  {
    return {};
  }
  static repair_target sample( double threshold )
  {
    repair_target t;
    t.mode = kind::sample_accuracy;
    t.threshold = threshold;
    return t;
  }
  static repair_target statistical( double confidence, double max_error )
  {
    repair_target t;
    t.mode = kind::statistical;
    t.confidence = confidence;
    t.max_error = max_error;
    return t;
  }
};

struct order_spec
{
  enum class kind : uint8_t
  {
    natural,
    support_driven,
    explicit_order
  };

  kind mode = kind::natural;
  std::vector<uint32_t> order;  /* explicit_order */
  size_t support_samples = 256; /* support_driven */

  static order_spec natural()
  {
    return {};
  }
  static order_spec support_driven( size_t samples_per_bit = 256 )
  {
    order_spec s;
    s.mode = kind::support_driven;
    s.support_samples = samples_per_bit;
    return s;
  }
  static order_spec explicit_order_of( std::vector<uint32_t> order )
  {
    order_spec s;
    s.mode = kind::explicit_order;
    s.order = std::move( order );
    return s;
  }
};

struct repair_config
{
  uint64_t seed = 1;
  size_t batch_size = 256;
  size_t max_cycles = 4096;
  uint64_t max_nodes = uint64_t( 1 ) << 26;
  size_t expansions_per_cycle_cap = std::numeric_limits<size_t>::max();
  repair_target target = repair_target::exhaustive();
  guess_policy guesses = guess_policy::majority();
  order_spec order = order_spec::natural();
  uint32_t exhaustive_threshold = default_exhaustive_threshold;

  void validate() const
  {
    if ( batch_size < 1u )
    {
      throw contract_error( "batch_size must be at least 1" );
    }
    if ( target.mode == repair_target::kind::sample_accuracy &&
         !( target.threshold > 0.0 && target.threshold <= 1.0 ) )
    {
      throw contract_error( "sample-accuracy threshold must be in (0, 1]" );
    }
    if ( target.mode == repair_target::kind::statistical )
    {
      if ( !( target.confidence > 0.0 && target.confidence < 1.0 ) )
      {
        throw contract_error( "statistical confidence must be in (0, 1)" );
      }
      if ( !( target.max_error > 0.0 && target.max_error <= 1.0 ) )
      {
        throw contract_error( "statistical max_error must be in (0, 1]" );
      }
    }
  }
};

/* ------------------------------------------------------------------ */
/* reports                                                             */
/* ------------------------------------------------------------------ */

struct cycle_record
{
  uint32_t cycle;
  uint64_t samples_seen; /* cumulative cache size */
  double sample_accuracy;
  std::optional<double> exact_accuracy;
  uint64_t node_count;
  uint64_t spec_leaf_count;
  uint64_t expansions;
  uint64_t const_repairs;
};

enum class convergence_status : uint8_t
{
  converged,
  budget_exhausted
};

struct convergence_report
{
  convergence_status status = convergence_status::budget_exhausted;
  std::vector<cycle_record> cycles;
  uint64_t total_samples = 0;
  uint64_t nodes_before_reduce = 0;
  uint64_t final_node_count = 0;
  uint64_t final_spec_leaf_count = 0;
  std::optional<double> final_exact_accuracy;

  bool monotone_cache_accuracy() const
  {
    for ( size_t i = 1; i < cycles.size(); ++i )
    {
      if ( cycles[i].sample_accuracy < cycles[i - 1u].sample_accuracy )
      {
        return false;
      }
    }
    return true;
  }

  bool monotone_exact_accuracy() const
  {
    std::optional<double> last;
    for ( auto const& c : cycles )
    {
      if ( !c.exact_accuracy )
      {
        continue;
      }
      if ( last && *c.exact_accuracy < *last )
      {
        return false;
      }
      last = c.exact_accuracy;
    }
    return true;
  }
};

/* ------------------------------------------------------------------ */
/* statistics helpers                                                  */
/* ------------------------------------------------------------------ */

/*! Inverse standard normal CDF (Acklam's rational approximation, |eps| < 1.2e-9). */
inline double probit( double p )
{
  if ( !( p > 0.0 && p < 1.0 ) )
  {
    throw contract_error( "probit requires p in (0, 1)" );
  }
  static constexpr double a[] = { -3.969683028665376e+01, 2.209460984245205e+02,
                                  -2.759285104469687e+02, 1.383577518672690e+02,
                                  -3.066479806614716e+01, 2.506628277459239e+00 };
  static constexpr double b[] = { -5.447609879822406e+01, 1.615858368580409e+02,
                                  -1.556989798598866e+02, 6.680131188771972e+01,
                                  -1.328068155288572e+01 };
  static constexpr double c[] = { -7.784894002430293e-03, -3.223964580411365e-01,
                                  -2.400758277161838e+00, -2.549732539343734e+00,
                                  4.374664141464968e+00,  2.938163982698783e+00 };
  static constexpr double d[] = { 7.784695709041462e-03, 3.224671290700398e-01,
                                  2.445134137142996e+00, 3.754408661907416e+00 };
  constexpr double plow = 0.02425;
  if ( p < plow )
  {
    double const q = std::sqrt( -2.0 * std::log( p ) );
    return ( ( ( ( ( c[0] * q + c[1] ) * q + c[2] ) * q + c[3] ) * q + c[4] ) * q + c[5] ) /
           ( ( ( ( d[0] * q + d[1] ) * q + d[2] ) * q + d[3] ) * q + 1.0 );
  }
  if ( p > 1.0 - plow )
  {
    double const q = std::sqrt( -2.0 * std::log( 1.0 - p ) );
    return -( ( ( ( ( c[0] * q + c[1] ) * q + c[2] ) * q + c[3] ) * q + c[4] ) * q + c[5] ) /
           ( ( ( ( d[0] * q + d[1] ) * q + d[2] ) * q + d[3] ) * q + 1.0 );
  }
  double const q = p - 0.5;
  double const r = q * q;
  return ( ( ( ( ( a[0] * r + a[1] ) * r + a[2] ) * r + a[3] ) * r + a[4] ) * r + a[5] ) * q /
         ( ( ( ( ( b[0] * r + b[1] ) * r + b[2] ) * r + b[3] ) * r + b[4] ) * r + 1.0 );
}

/*! Wilson score interval for k successes out of n at two-sided confidence. */
inline std::pair<double, double> wilson_interval( uint64_t k, uint64_t n, double confidence )
{
  if ( n == 0u )
  {
    return { 0.0, 1.0 };
  }
  double const z = probit( 0.5 + confidence / 2.0 );
  double const nn = static_cast<double>( n );
  double const phat = static_cast<double>( k ) / nn;
  double const z2 = z * z;
  double const denom = 1.0 + z2 / nn;
  double const center = ( phat + z2 / ( 2.0 * nn ) ) / denom;
  double const half =
      z * std::sqrt( phat * ( 1.0 - phat ) / nn + z2 / ( 4.0 * nn * nn ) ) / denom;
  return { std::max( 0.0, center - half ), std::min( 1.0, center + half ) };
}

/*! One-sided all-pass sample size: if n fresh samples all match, the input
 *  error rate is below max_error with the stated confidence. */
inline uint64_t required_statistical_samples( double confidence, double max_error )
{
  if ( !( confidence > 0.0 && confidence < 1.0 ) || !( max_error > 0.0 && max_error <= 1.0 ) )
  {
    throw contract_error( "statistical parameters out of range" );
  }
  return static_cast<uint64_t>( std::ceil( std::log( 1.0 / ( 1.0 - confidence ) ) / max_error ) );
}

/* ------------------------------------------------------------------ */
/* verification                                                        */
/* ------------------------------------------------------------------ */

struct verify_mode
{
  enum class kind : uint8_t
  {
    exhaustive,
    statistical
  };

  kind mode = kind::exhaustive;
  double confidence = 0.99;
  double max_error = 0.001;
  uint64_t seed = 1;
  uint32_t exhaustive_threshold = default_exhaustive_threshold;

  static verify_mode exhaustive( uint32_t threshold = default_exhaustive_threshold )
  {
    verify_mode m;
    m.exhaustive_threshold = threshold;
    return m;
  }
  static verify_mode statistical( double confidence, double max_error, uint64_t seed = 1 )
  {
    verify_mode m;
    m.mode = kind::statistical;
    m.confidence = confidence;
    m.max_error = max_error;
    m.seed = seed;
    return m;
  }
};

struct verification_report
{
  verify_mode::kind mode;
  uint64_t inputs_checked = 0;
  uint64_t mismatches = 0; /* inputs with at least one wrong output bit */
  double error_rate = 0.0;
  double interval_low = 0.0;
  double interval_high = 0.0;
  double confidence = 0.95;
  bool pass = false;
};

namespace detail
{

template<typename EvalFn>
inline verification_report verify_impl( EvalFn&& eval, uint32_t width_in, oracle const& fn,
                                        verify_mode const& mode )
{
  verification_report r;
  r.mode = mode.mode;
  if ( mode.mode == verify_mode::kind::exhaustive )
  {
    if ( width_in > mode.exhaustive_threshold )
    {
      throw enumeration_refused( width_in, mode.exhaustive_threshold );
    }
    uint64_t const n = uint64_t( 1 ) << width_in;
    for ( uint64_t x = 0; x < n; ++x )
    {
      if ( eval( x ) != fn.eval_raw( x ) )
      {
        ++r.mismatches;
      }
    }
    r.inputs_checked = n;
    r.confidence = 1.0;
    r.error_rate = static_cast<double>( r.mismatches ) / static_cast<double>( n );
    r.interval_low = r.interval_high = r.error_rate;
    r.pass = r.mismatches == 0u;
    return r;
  }

  uint64_t const n = required_statistical_samples( mode.confidence, mode.max_error );
  input_sampler gen( mode.seed, width_in );
  for ( uint64_t i = 0; i < n; ++i )
  {
    uint64_t const x = gen.next();
    if ( eval( x ) != fn.eval_raw( x ) )
    {
      ++r.mismatches;
    }
  }
  r.inputs_checked = n;
  r.confidence = mode.confidence;
  r.error_rate = static_cast<double>( r.mismatches ) / static_cast<double>( n );
  std::tie( r.interval_low, r.interval_high ) =
      wilson_interval( r.mismatches, n, mode.confidence );
  r.pass = r.mismatches == 0u;
  return r;
}

} // namespace detail

/*! Check a diagram against its oracle, exhaustively or statistically. */
inline verification_report verify( bsd const& d, oracle const& fn, verify_mode const& mode )
{
  if ( d.width_in() != fn.num_inputs() || d.width_out() != fn.num_outputs() )
  {
    throw contract_error( "oracle widths do not match the diagram" );
  }
  return detail::verify_impl( [&]( uint64_t x ) { return d.eval_raw( x ); }, d.width_in(), fn,
                              mode );
}

/*! Check a netlist against its oracle, exhaustively or statistically. */
inline verification_report verify( netlist const& nl, oracle const& fn, verify_mode const& mode )
{
  if ( nl.width_in() != fn.num_inputs() || nl.width_out() != fn.num_outputs() )
  {
    throw contract_error( "oracle widths do not match the netlist" );
  }
  std::vector<uint8_t> scratch;
  return detail::verify_impl( [&]( uint64_t x ) { return nl.simulate_raw( x, scratch ); },
                              nl.width_in(), fn, mode );
}

/* ------------------------------------------------------------------ */
/* fault location                                                      */
/* ------------------------------------------------------------------ */

struct fault_site
{
  uint32_t output_bit;
  node_ref node;
  bool hard;       /* true when the failing path ends at a constant leaf */
  node_ref parent; /* null_ref when the leaf is the root */
  bool via_hi;
};

/*! For each mismatched output bit, the leaf terminating the failing decision
 *  path.  Requires at least one mismatch (an exact diagram has no fault). */
inline std::vector<fault_site> locate_fault( bsd const& d, io_sample const& sample )
{
  if ( sample.input.width() != d.width_in() || sample.output.width() != d.width_out() )
  {
    throw contract_error( "sample widths do not match the diagram" );
  }
  uint64_t const x = sample.input.value();
  std::vector<fault_site> sites;
  for ( uint32_t j = 0; j < d.width_out(); ++j )
  {
    node_ref parent = null_ref;
    bool via_hi = false;
    node_ref ref = d.root( j );
    while ( d.node( ref ).kind == node_kind::decision )
    {
      auto const& n = d.node( ref );
      parent = ref;
      via_hi = ( x >> n.var ) & 1u;
      ref = via_hi ? n.hi : n.lo;
    }
    bool const got = d.node( ref ).value != 0u;
    if ( got != sample.output.test( j ) )
    {
      sites.push_back(
          { j, ref, d.node( ref ).kind == node_kind::const_leaf, parent, via_hi } );
    }
  }
  if ( sites.empty() )
  {
    throw contract_error( "locate_fault requires a mismatching sample" );
  }
  return sites;
}

/* ------------------------------------------------------------------ */
/* the repair engine                                                   */
/* ------------------------------------------------------------------ */

namespace detail
{
inline constexpr uint64_t tag_initial_guesses = 3u;
inline constexpr uint64_t tag_support = 4u;
inline constexpr uint64_t tag_guess_stream = 5u;
inline uint64_t tag_batch( uint32_t cycle )
{
  return ( uint64_t( 1 ) << 32 ) | cycle;
}
inline uint64_t tag_stat_check( uint32_t cycle )
{
  return ( uint64_t( 2 ) << 32 ) | cycle;
}
} // namespace detail

/*! Resolve an order_spec against an oracle. */
inline std::vector<uint32_t> resolve_order( order_spec const& spec, oracle const& fn,
                                            uint64_t seed )
{
  switch ( spec.mode )
  {
  case order_spec::kind::natural: return natural_order( fn.num_inputs() );
  case order_spec::kind::support_driven:
    return support_breadth_order( fn, derive_seed( seed, detail::tag_support ),
                                  spec.support_samples );
  case order_spec::kind::explicit_order: return spec.order;
  }
  return natural_order( fn.num_inputs() );
}

/*! Stateful verify-repair session.  Owns the routing of cached samples to
 *  leaves so repeated cycles cost only the new work.  The diagram and cache
 *  are referenced, not owned; a session must be the only writer while alive. */
class repair_session
{
public:
  repair_session( bsd& diagram, oracle const& fn, std::vector<io_sample>& cache,
                  repair_config const& config )
      : _d( diagram ), _fn( fn ), _cache( cache ), _config( config ),
        _guess_rng( derive_seed( config.seed, detail::tag_guess_stream ), 1u )
  {
    _config.validate();
    if ( _d.width_in() != fn.num_inputs() || _d.width_out() != fn.num_outputs() )
    {
      throw contract_error( "oracle widths do not match the diagram" );
    }
    bool const enumerable = _d.width_in() <= _config.exhaustive_threshold;
    if ( _config.target.mode == repair_target::kind::exhaustive100 && !enumerable )
    {
      throw enumeration_refused( _d.width_in(), _config.exhaustive_threshold );
    }
    if ( _config.guesses.mode == guess_policy::kind::exact_cofactor_majority && !enumerable )
    {
      throw enumeration_refused( _d.width_in(), _config.exhaustive_threshold );
    }
    _record_exact = _config.target.mode == repair_target::kind::exhaustive100 ||
                    ( enumerable && _d.width_in() <= 16u );
    if ( _record_exact )
    {
      _tables.emplace( fn, _d.order(), _config.exhaustive_threshold );
    }
    _tree_form = detect_tree_form();
    _bucket_of.assign( _d.node_count(), -1 );
    for ( uint32_t i = 0; i < _cache.size(); ++i )
    {
      route_sample( i );
    }
  }

  bsd& diagram() { return _d; }
  std::vector<io_sample> const& cache() const { return _cache; }
  bool node_budget_hit() const { return _budget_hit; }

  /*! Accuracy of the current diagram over the cumulative cache. */
  double cache_accuracy() const
  {
    if ( _cache.empty() )
    {
      return 1.0;
    }
    return 1.0 - static_cast<double>( _total_mismatches ) /
                     ( static_cast<double>( _cache.size() ) *
                       static_cast<double>( _d.width_out() ) );
  }

  /*! One verify-repair cycle.  Returns its record and signals convergence. */
  cycle_record run_cycle( uint32_t cycle_index, bool& converged )
  {
    converged = false;
    _expansions_this_cycle = 0;
    _const_repairs_this_cycle = 0;

    /* the first exhaustive cycle needs a baseline sweep for counterexamples */
    if ( _config.target.mode == repair_target::kind::exhaustive100 && !_swept_once )
    {
      sweep();
    }

    auto const fresh = gather_fresh( cycle_index );
    double batch_accuracy = 1.0;
    if ( !fresh.empty() )
    {
      uint64_t batch_mismatch_bits = 0;
      for ( auto const& s : fresh )
      {
        uint64_t const got = _d.eval_raw( s.input.value() );
        uint64_t const wrong = ( got ^ s.output.value() ) & _fn.output_mask();
        batch_mismatch_bits += static_cast<uint64_t>( __builtin_popcountll( wrong ) );
      }
      batch_accuracy = 1.0 - static_cast<double>( batch_mismatch_bits ) /
                                 ( static_cast<double>( fresh.size() ) *
                                   static_cast<double>( _d.width_out() ) );
      for ( auto const& s : fresh )
      {
        _cache.push_back( s );
        route_sample( static_cast<uint32_t>( _cache.size() - 1u ) );
      }
    }

    bool const sample_target_met =
        _config.target.mode == repair_target::kind::sample_accuracy && !fresh.empty() &&
        batch_accuracy >= _config.target.threshold;
    fit(); /* fit even on a met sample target so cache accuracy stays monotone */

    cycle_record rec;
    rec.cycle = cycle_index;
    rec.samples_seen = _cache.size();
    rec.sample_accuracy = cache_accuracy();
    rec.node_count = _d.node_count();
    rec.spec_leaf_count = _d.spec_leaf_count();
    rec.expansions = _expansions_this_cycle;
    rec.const_repairs = _const_repairs_this_cycle;
    if ( _record_exact )
    {
      rec.exact_accuracy = sweep();
    }

    switch ( _config.target.mode )
    {
    case repair_target::kind::exhaustive100:
      converged = _last_sweep_mismatch_bits == 0u;
      break;
    case repair_target::kind::sample_accuracy:
      converged = sample_target_met;
      break;
    case repair_target::kind::statistical:
      converged = statistical_check( cycle_index );
      break;
    }
    return rec;
  }

  /*! Exhaustive sweep (needs enumerable width): records exact accuracy and
   *  harvests up to batch_size counterexamples for the next cycle. */
  double sweep()
  {
    _swept_once = true;
    _stash.clear();
    if ( _tree_form )
    {
      return sweep_tree();
    }
    return sweep_generic();
  }

private:
  struct bucket
  {
    uint32_t output_bit;
    uint32_t mismatches;
    uint64_t care;  /* path cube */
    uint64_t value;
    std::vector<uint32_t> samples;
  };

  bool detect_tree_form() const
  {
    /* in tree form every decision at depth d tests order[d]; expansion
       preserves this, so one scan at construction suffices */
    for ( uint32_t j = 0; j < _d.width_out(); ++j )
    {
      std::vector<std::pair<node_ref, uint32_t>> stack{ { _d.root( j ), 0u } };
      while ( !stack.empty() )
      {
        auto const [ref, depth] = stack.back();
        stack.pop_back();
        auto const& n = _d.node( ref );
        if ( n.kind != node_kind::decision )
        {
          continue;
        }
        if ( depth >= _d.width_in() || n.var != _d.order()[depth] )
        {
          return false;
        }
        stack.emplace_back( n.hi, depth + 1u );
        stack.emplace_back( n.lo, depth + 1u );
      }
    }
    return true;
  }

  /* ---- sample routing ---- */

  void ensure_slot( node_ref ref )
  {
    if ( _bucket_of.size() <= ref )
    {
      _bucket_of.resize( _d.node_count(), -1 );
    }
  }

  bucket& bucket_at( node_ref ref, uint32_t output_bit, uint64_t care, uint64_t value )
  {
    ensure_slot( ref );
    if ( _bucket_of[ref] < 0 )
    {
      int32_t slot;
      if ( !_free_buckets.empty() )
      {
        slot = _free_buckets.back();
        _free_buckets.pop_back();
        _buckets[slot] = bucket{ output_bit, 0u, care, value, {} };
      }
      else
      {
        slot = static_cast<int32_t>( _buckets.size() );
        _buckets.push_back( bucket{ output_bit, 0u, care, value, {} } );
      }
      _bucket_of[ref] = slot;
    }
    return _buckets[_bucket_of[ref]];
  }

  void mark_faulty( node_ref ref, bucket const& b )
  {
    if ( b.mismatches == 1u )
    {
      _faulty.push_back( ref );
    }
  }

  /*! Route one cached sample through every output-bit tree. */
  void route_sample( uint32_t sample_idx )
  {
    auto const& s = _cache[sample_idx];
    uint64_t const x = s.input.value();
    for ( uint32_t j = 0; j < _d.width_out(); ++j )
    {
      route_bit( sample_idx, j, _d.root( j ), 0u, 0u, x, s.output.test( j ) );
    }
  }

  void route_bit( uint32_t sample_idx, uint32_t output_bit, node_ref ref, uint64_t care,
                  uint64_t value, uint64_t x, bool want )
  {
    uint32_t next_pos = 0;
    while ( _d.node( ref ).kind == node_kind::decision )
    {
      auto const& n = _d.node( ref );
      bool const bit = ( x >> n.var ) & 1u;
      care |= uint64_t( 1 ) << n.var;
      if ( bit )
      {
        value |= uint64_t( 1 ) << n.var;
      }
      next_pos = _d.position_of( n.var ) + 1u;
      ref = bit ? n.hi : n.lo;
    }
    auto const& leaf = _d.node( ref );
    bool const got = leaf.value != 0u;
    if ( leaf.kind == node_kind::const_leaf )
    {
      if ( static_cast<uint32_t>( __builtin_popcountll( care ) ) == _d.width_in() )
      {
        /* single-input region: the sample is the truth; repair in place */
        if ( got != want )
        {
          _d.set_leaf_value( ref, want );
          ++_const_repairs_this_cycle;
          ++_total_const_repairs;
        }
        return; /* permanently consistent, no need to track */
      }
      /* constant leaf above full depth (hand-built or reduced diagram):
         track it so a mismatch can demote it back to speculation */
      auto& b = bucket_at( ref, output_bit, care, value );
      b.samples.push_back( sample_idx );
      if ( got != want )
      {
        ++b.mismatches;
        ++_total_mismatches;
        mark_faulty( ref, b );
        demote_const( ref, static_cast<uint8_t>( next_pos ) );
      }
      return;
    }
    auto& b = bucket_at( ref, output_bit, care, value );
    b.samples.push_back( sample_idx );
    if ( got != want )
    {
      ++b.mismatches;
      ++_total_mismatches;
      mark_faulty( ref, b );
    }
  }

  void demote_const( node_ref ref, uint8_t next_pos )
  {
    _d.demote_to_spec( ref, next_pos );
    ++_const_repairs_this_cycle;
    ++_total_const_repairs;
  }

  /* ---- guesses ---- */

  std::pair<bool, bool> child_guesses( bucket const& b, bsd_node const& leaf, uint32_t var,
                                       std::vector<uint32_t> const& hi_samples,
                                       std::vector<uint32_t> const& lo_samples )
  {
    (void)var;
    switch ( _config.guesses.mode )
    {
    case guess_policy::kind::constant_zero:
      return { false, false };
    case guess_policy::kind::random_seeded:
    {
      bool const hg = _guess_rng.next_bit();
      bool const lg = _guess_rng.next_bit();
      return { hg, lg };
    }
    case guess_policy::kind::sample_majority:
    {
      auto majority = [&]( std::vector<uint32_t> const& side ) {
        if ( side.empty() )
        {
          return leaf.value != 0u; /* no evidence: inherit */
        }
        uint64_t ones = 0;
        for ( auto const idx : side )
        {
          ones += _cache[idx].output.test( b.output_bit ) ? 1u : 0u;
        }
        if ( ones * 2u == side.size() )
        {
          return _config.guesses.tie_break;
        }
        return ones * 2u > side.size();
      };
      return { majority( hi_samples ), majority( lo_samples ) };
    }
    case guess_policy::kind::exact_cofactor_majority:
    {
      auto exact_majority = [&]( bool side_bit ) {
        uint64_t const bit = uint64_t( 1 ) << var;
        uint64_t const care = b.care | bit;
        uint64_t const base = b.value | ( side_bit ? bit : 0u );
        uint64_t const free = ~care & _fn.input_mask();
        uint64_t ones = 0, total = 0;
        uint64_t s = free;
        while ( true )
        {
          uint64_t const x = base | s;
          ones += ( _fn.eval_raw( x ) >> b.output_bit ) & 1u;
          ++total;
          if ( s == 0u )
          {
            break;
          }
          s = ( s - 1u ) & free;
        }
        if ( ones * 2u == total )
        {
          return _config.guesses.tie_break;
        }
        return ones * 2u > total;
      };
      return { exact_majority( true ), exact_majority( false ) };
    }
    }
    return { false, false };
  }

  /* ---- fitting ---- */

  /*! Expansion passes until the cumulative cache is fully fit or a budget
   *  binds.  Each pass expands each distinct faulty leaf at most once, by
   *  descending mismatch count then ascending node id. */
  void fit()
  {
    while ( !_faulty.empty() )
    {
      if ( _expansions_this_cycle >= _config.expansions_per_cycle_cap || _budget_hit )
      {
        return;
      }
      /* snapshot: drop entries resolved meanwhile, order deterministically */
      std::vector<std::pair<node_ref, uint32_t>> pass;
      pass.reserve( _faulty.size() );
      for ( auto const ref : _faulty )
      {
        if ( _bucket_of[ref] >= 0 && _buckets[_bucket_of[ref]].mismatches > 0u )
        {
          pass.emplace_back( ref, _buckets[_bucket_of[ref]].mismatches );
        }
      }
      _faulty.clear();
      std::sort( pass.begin(), pass.end(), []( auto const& a, auto const& b ) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
      } );

      for ( auto const& [ref, mismatches] : pass )
      {
        (void)mismatches;
        if ( _expansions_this_cycle >= _config.expansions_per_cycle_cap )
        {
          _faulty.push_back( ref );
          continue;
        }
        if ( _d.node_count() + 2u > _config.max_nodes )
        {
          _budget_hit = true;
          _faulty.push_back( ref );
          continue;
        }
        expand_leaf( ref );
      }
      if ( _budget_hit )
      {
        return;
      }
    }
  }

  void expand_leaf( node_ref ref )
  {
    int32_t const slot = _bucket_of[ref];
    bucket b = std::move( _buckets[slot] );
    _buckets[slot] = bucket{};
    _bucket_of[ref] = -1;
    _free_buckets.push_back( slot );
    _total_mismatches -= b.mismatches;

    auto const& leaf = _d.node( ref );
    uint32_t const var = _d.order()[leaf.depth];
    uint64_t const bit = uint64_t( 1 ) << var;

    std::vector<uint32_t> hi_samples, lo_samples;
    for ( auto const idx : b.samples )
    {
      ( ( _cache[idx].input.value() >> var ) & 1u ? hi_samples : lo_samples ).push_back( idx );
    }
    auto const [hg, lg] = child_guesses( b, leaf, var, hi_samples, lo_samples );
    auto const [hi_ref, lo_ref] = _d.shannon_expand( ref, hg, lg );
    ++_expansions_this_cycle;
    ++_total_expansions;
    ensure_slot( lo_ref );

    settle_child( hi_ref, b, hi_samples, b.care | bit, b.value | bit );
    settle_child( lo_ref, b, lo_samples, b.care | bit, b.value );
  }

  void settle_child( node_ref child, bucket const& parent, std::vector<uint32_t> const& samples,
                     uint64_t care, uint64_t value )
  {
    auto const& n = _d.node( child );
    if ( n.kind == node_kind::const_leaf )
    {
      /* full depth: single-input region; any mismatching sample holds the truth */
      bool const got = n.value != 0u;
      for ( auto const idx : samples )
      {
        if ( _cache[idx].output.test( parent.output_bit ) != got )
        {
          _d.set_leaf_value( child, !got );
          ++_const_repairs_this_cycle;
          ++_total_const_repairs;
          break;
        }
      }
      return;
    }
    if ( samples.empty() )
    {
      return; /* bucket is created lazily when a sample arrives */
    }
    auto& b = bucket_at( child, parent.output_bit, care, value );
    b.samples = samples;
    bool const guess = n.value != 0u;
    uint32_t mismatches = 0;
    for ( auto const idx : samples )
    {
      mismatches += _cache[idx].output.test( parent.output_bit ) != guess ? 1u : 0u;
    }
    b.mismatches = mismatches;
    _total_mismatches += mismatches;
    if ( mismatches > 0u )
    {
      _faulty.push_back( child );
    }
  }

  /* ---- exhaustive sweep ---- */

  double sweep_tree()
  {
    uint64_t const n = uint64_t( 1 ) << _d.width_in();
    uint64_t wrong_bits = 0;
    struct faulty_region
    {
      uint64_t base;
      uint64_t len;
      uint64_t wrong;
      bool guess;
      uint32_t output_bit;
    };
    std::vector<faulty_region> regions;

    for ( uint32_t j = 0; j < _d.width_out(); ++j )
    {
      std::vector<std::tuple<node_ref, uint32_t, uint64_t>> stack{ { _d.root( j ), 0u, 0u } };
      while ( !stack.empty() )
      {
        auto const [ref, depth, prefix] = stack.back();
        stack.pop_back();
        auto const& node = _d.node( ref );
        if ( node.kind == node_kind::decision )
        {
          stack.emplace_back( node.hi, depth + 1u, ( prefix << 1 ) | 1u );
          stack.emplace_back( node.lo, depth + 1u, prefix << 1 );
          continue;
        }
        uint64_t const len = uint64_t( 1 ) << ( _d.width_in() - depth );
        uint64_t const base = prefix * len;
        uint64_t const ones = _tables->count_ones( j, base, base + len );
        bool const guess = node.value != 0u;
        uint64_t const wrong = guess ? len - ones : ones;
        wrong_bits += wrong;
        if ( wrong > 0u )
        {
          regions.push_back( { base, len, wrong, guess, j } );
        }
      }
    }
    _last_sweep_mismatch_bits = wrong_bits;

    if ( wrong_bits > 0u && _config.target.mode == repair_target::kind::exhaustive100 )
    {
      size_t const quota =
          std::max<size_t>( 1u, _config.batch_size / std::max<size_t>( 1u, regions.size() ) );
      std::vector<uint64_t> addrs;
      for ( auto const& reg : regions )
      {
        if ( _stash.size() >= _config.batch_size )
        {
          break;
        }
        addrs.clear();
        size_t const want = std::min<size_t>( quota, _config.batch_size - _stash.size() );
        _tables->collect_mismatches( reg.output_bit, reg.base, reg.base + reg.len, reg.guess,
                                     want, addrs );
        for ( auto const a : addrs )
        {
          push_counterexample( _tables->input_of( a ) );
        }
      }
      /* second round: fill the batch from the largest regions */
      for ( auto const& reg : regions )
      {
        if ( _stash.size() >= _config.batch_size )
        {
          break;
        }
        addrs.clear();
        _tables->collect_mismatches( reg.output_bit, reg.base, reg.base + reg.len, reg.guess,
                                     _config.batch_size - _stash.size(), addrs );
        for ( auto const a : addrs )
        {
          push_counterexample( _tables->input_of( a ) );
        }
      }
    }
    return 1.0 -
           static_cast<double>( wrong_bits ) /
               ( static_cast<double>( n ) * static_cast<double>( _d.width_out() ) );
  }

  double sweep_generic()
  {
    uint64_t const n = uint64_t( 1 ) << _d.width_in();
    uint64_t wrong_bits = 0;
    for ( uint64_t x = 0; x < n; ++x )
    {
      uint64_t const wrong = ( _d.eval_raw( x ) ^ _fn.eval_raw( x ) ) & _fn.output_mask();
      if ( wrong != 0u )
      {
        wrong_bits += static_cast<uint64_t>( __builtin_popcountll( wrong ) );
        if ( _config.target.mode == repair_target::kind::exhaustive100 &&
             _stash.size() < _config.batch_size )
        {
          push_counterexample( x );
        }
      }
    }
    _last_sweep_mismatch_bits = wrong_bits;
    return 1.0 -
           static_cast<double>( wrong_bits ) /
               ( static_cast<double>( n ) * static_cast<double>( _d.width_out() ) );
  }

  void push_counterexample( uint64_t x )
  {
    _stash.push_back( _fn.sample_at( x ) );
  }

  /* ---- fresh samples ---- */

  std::vector<io_sample> gather_fresh( uint32_t cycle_index )
  {
    switch ( _config.target.mode )
    {
    case repair_target::kind::exhaustive100:
    {
      auto fresh = std::move( _stash );
      _stash.clear();
      return fresh;
    }
    case repair_target::kind::statistical:
      if ( !_stash.empty() )
      {
        auto fresh = std::move( _stash );
        _stash.clear();
        return fresh;
      }
      [[fallthrough]];
    case repair_target::kind::sample_accuracy:
    {
      input_sampler gen( derive_seed( _config.seed, detail::tag_batch( cycle_index ) ),
                         _d.width_in() );
      std::vector<io_sample> fresh;
      fresh.reserve( _config.batch_size );
      for ( size_t i = 0; i < _config.batch_size; ++i )
      {
        fresh.push_back( _fn.sample_at( gen.next() ) );
      }
      return fresh;
    }
    }
    return {};
  }

  bool statistical_check( uint32_t cycle_index )
  {
    uint64_t const n =
        required_statistical_samples( _config.target.confidence, _config.target.max_error );
    input_sampler gen( derive_seed( _config.seed, detail::tag_stat_check( cycle_index ) ),
                       _d.width_in() );
    bool all_pass = true;
    for ( uint64_t i = 0; i < n; ++i )
    {
      uint64_t const x = gen.next();
      if ( _d.eval_raw( x ) != _fn.eval_raw( x ) )
      {
        all_pass = false;
        if ( _stash.size() < _config.batch_size )
        {
          push_counterexample( x );
        }
      }
    }
    return all_pass;
  }

  bsd& _d;
  oracle const& _fn;
  std::vector<io_sample>& _cache;
  repair_config _config;
  input_sampler _guess_rng;
  std::optional<packed_truth_table> _tables;
  bool _record_exact = false;
  bool _tree_form = true;
  bool _swept_once = false;
  bool _budget_hit = false;

  std::vector<int32_t> _bucket_of;
  std::vector<bucket> _buckets;
  std::vector<int32_t> _free_buckets;
  std::vector<node_ref> _faulty;
  std::vector<io_sample> _stash;

  uint64_t _total_mismatches = 0;
  uint64_t _total_expansions = 0;
  uint64_t _total_const_repairs = 0;
  uint64_t _last_sweep_mismatch_bits = 0;
  size_t _expansions_this_cycle = 0;
  size_t _const_repairs_this_cycle = 0;
};

/*! One verify-repair cycle over an externally owned diagram and cache.
 *  Deterministic per (config.seed, cycle_index). */
inline cycle_record repair_cycle( bsd& d, oracle const& fn, std::vector<io_sample>& cache,
                                  repair_config const& config, uint32_t cycle_index = 1u )
{
  repair_session session( d, fn, cache, config );
  bool converged = false;
  return session.run_cycle( cycle_index, converged );
}

struct synthesis_result
{
  bsd diagram;
  convergence_report report;
};

/*! Grow a diagram for the oracle until the configured target is met or a
 *  budget binds.  On convergence the diagram is promoted and reduced; the
 *  final exact accuracy is recorded when the width is enumerable. */
inline synthesis_result synthesize_module( oracle const& fn, repair_config const& config )
{
  config.validate();
  auto order = resolve_order( config.order, fn, config.seed );

  guess_policy initial = config.guesses;
  if ( initial.mode == guess_policy::kind::random_seeded )
  {
    initial.seed = derive_seed( config.seed, detail::tag_initial_guesses );
  }
  if ( initial.mode == guess_policy::kind::exact_cofactor_majority )
  {
    initial.reference = &fn;
  }

  bsd d( fn.num_inputs(), fn.num_outputs(), std::move( order ), initial,
         config.exhaustive_threshold );

  convergence_report report;
  std::vector<io_sample> cache;
  repair_session session( d, fn, cache, config );

  bool converged = false;
  if ( config.target.mode == repair_target::kind::exhaustive100 )
  {
    converged = session.sweep() == 1.0; /* already exact: zero cycles */
  }
  uint32_t cycle = 0;
  while ( !converged )
  {
    if ( cycle >= config.max_cycles || session.node_budget_hit() )
    {
      break;
    }
    ++cycle;
    report.cycles.push_back( session.run_cycle( cycle, converged ) );
  }

  report.total_samples = cache.size();
  report.nodes_before_reduce = d.node_count();
  if ( converged )
  {
    report.status = convergence_status::converged;
    d.promote_spec_leaves();
    d = reduce( d );
  }
  else
  {
    report.status = convergence_status::budget_exhausted;
  }
  report.final_node_count = d.node_count();
  report.final_spec_leaf_count = d.spec_leaf_count();
  if ( d.width_in() <= config.exhaustive_threshold &&
       ( config.target.mode == repair_target::kind::exhaustive100 || d.width_in() <= 16u ) )
  {
    report.final_exact_accuracy = exact_accuracy( d, fn, config.exhaustive_threshold );
  }
  return { std::move( d ), std::move( report ) };
}

} // namespace bsdsynth
