/* bsdsynth: oracle-guided combinational logic synthesis
 * Copyright (C) 2026 bsdsynth contributors */

/*!
  \file oracle.hpp
  \brief Black-box functional specifications and sampling utilities

  An oracle is a deterministic, total boolean function with declared input
  and output widths.  It is the golden reference every synthesized design is
  verified against.  Oracles are immutable after construction and safe for
  concurrent evaluation.
*/

#pragma once

#include "bitvec.hpp"
#include "errors.hpp"
#include "rng.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace bsdsynth
{

/*! Default cap for exhaustive enumeration: 2^24 evaluations stay in seconds. */
inline constexpr uint32_t default_exhaustive_threshold = 24u;

struct io_sample
{
  bitvec input;
  bitvec output;

  bool operator==( io_sample const& other ) const
  {
    return input == other.input && output == other.output;
  }
};

class oracle
{
public:
  oracle( std::string name, uint32_t num_inputs, uint32_t num_outputs,
          std::function<uint64_t( uint64_t )> fn )
      : _name( std::move( name ) ), _num_inputs( num_inputs ), _num_outputs( num_outputs ),
        _fn( std::move( fn ) )
  {
    if ( _num_inputs < 1u || _num_inputs > bitvec::max_width || _num_outputs < 1u ||
         _num_outputs > bitvec::max_width )
    {
      throw contract_error( "oracle widths must be in [1, 64]" );
    }
    if ( !_fn )
    {
      throw contract_error( "oracle requires an evaluation function" );
    }
  }

  std::string const& name() const { return _name; }
  uint32_t num_inputs() const { return _num_inputs; }
  uint32_t num_outputs() const { return _num_outputs; }

  /*! Fast path over packed values; the input is masked to width. */
  uint64_t eval_raw( uint64_t input ) const
  {
    return _fn( input & input_mask() ) & output_mask();
  }

  bitvec eval( bitvec const& input ) const
  {
    if ( input.width() != _num_inputs )
    {
      throw contract_error( "oracle '" + _name + "' expects " + std::to_string( _num_inputs ) +
                            " input bits, got " + std::to_string( input.width() ) );
    }
    return bitvec( _num_outputs, eval_raw( input.value() ) );
  }

  io_sample sample_at( uint64_t input ) const
  {
    return { bitvec( _num_inputs, input ), bitvec( _num_outputs, eval_raw( input ) ) };
  }

  uint64_t input_mask() const
  {
    return _num_inputs == 64u ? ~uint64_t( 0 ) : ( ( uint64_t( 1 ) << _num_inputs ) - 1u );
  }
  uint64_t output_mask() const
  {
    return _num_outputs == 64u ? ~uint64_t( 0 ) : ( ( uint64_t( 1 ) << _num_outputs ) - 1u );
  }

private:
  std::string _name;
  uint32_t _num_inputs;
  uint32_t _num_outputs;
  std::function<uint64_t( uint64_t )> _fn;
};

/*! All 2^width_in samples in ascending input order. */
inline std::vector<io_sample> enumerate_truth_table(
    oracle const& fn, uint32_t threshold = default_exhaustive_threshold )
{
  if ( fn.num_inputs() > threshold )
  {
    throw enumeration_refused( fn.num_inputs(), threshold );
  }
  uint64_t const count = uint64_t( 1 ) << fn.num_inputs();
  std::vector<io_sample> samples;
  samples.reserve( count );
  for ( uint64_t x = 0; x < count; ++x )
  {
    samples.push_back( fn.sample_at( x ) );
  }
  return samples;
}

/*! k inputs drawn uniformly with replacement from a seeded deterministic stream. */
inline std::vector<io_sample> sample_io( oracle const& fn, uint64_t seed, size_t k )
{
  if ( k < 1u )
  {
    throw contract_error( "sample_io requires k >= 1" );
  }
  input_sampler gen( seed, fn.num_inputs() );
  std::vector<io_sample> samples;
  samples.reserve( k );
  for ( size_t i = 0; i < k; ++i )
  {
    samples.push_back( fn.sample_at( gen.next() ) );
  }
  return samples;
}

/*! Sampled sensitivity analysis: every input bit observed to flip the given
 *  output bit on at least one of k sampled inputs.  The result is a subset of
 *  the true support and grows monotonically with k under one seed. */
inline std::vector<uint32_t> estimate_support( oracle const& fn, uint32_t output_bit,
                                               uint64_t seed, size_t k )
{
  if ( output_bit >= fn.num_outputs() )
  {
    throw contract_error( "output bit " + std::to_string( output_bit ) +
                          " out of range for oracle '" + fn.name() + "'" );
  }
  std::vector<bool> hit( fn.num_inputs(), false );
  input_sampler gen( seed, fn.num_inputs() );
  for ( size_t s = 0; s < k; ++s )
  {
    uint64_t const x = gen.next();
    bool const base = ( fn.eval_raw( x ) >> output_bit ) & 1u;
    for ( uint32_t i = 0; i < fn.num_inputs(); ++i )
    {
      if ( hit[i] )
      {
        continue;
      }
      bool const flipped = ( fn.eval_raw( x ^ ( uint64_t( 1 ) << i ) ) >> output_bit ) & 1u;
      if ( flipped != base )
      {
        hit[i] = true;
      }
    }
  }
  std::vector<uint32_t> support;
  for ( uint32_t i = 0; i < fn.num_inputs(); ++i )
  {
    if ( hit[i] )
    {
      support.push_back( i );
    }
  }
  return support;
}

/*! Restriction of an oracle to a subset of output bits, optionally over a
 *  subset of input bits (unrestricted inputs are tied to 0).  Used by the
 *  decomposition search to carve per-module specifications. */
inline oracle project_oracle( oracle const& fn, std::vector<uint32_t> output_bits,
                              std::optional<std::vector<uint32_t>> input_bits = std::nullopt )
{
  if ( output_bits.empty() )
  {
    throw contract_error( "projection requires at least one output bit" );
  }
  for ( auto b : output_bits )
  {
    if ( b >= fn.num_outputs() )
    {
      throw contract_error( "projected output bit out of range" );
    }
  }
  if ( input_bits )
  {
    if ( input_bits->empty() )
    {
      throw contract_error( "input restriction must keep at least one bit" );
    }
    for ( auto b : *input_bits )
    {
      if ( b >= fn.num_inputs() )
      {
        throw contract_error( "restricted input bit out of range" );
      }
    }
  }

  uint32_t const wout = static_cast<uint32_t>( output_bits.size() );
  uint32_t const win = input_bits ? static_cast<uint32_t>( input_bits->size() ) : fn.num_inputs();
  std::string name = fn.name() + "/proj";
  auto base = fn; /* oracles are cheap immutable handles */
  auto ins = std::move( input_bits );
  auto outs = std::move( output_bits );
  return oracle( std::move( name ), win, wout, [base, ins, outs]( uint64_t y ) {
    uint64_t x = y;
    if ( ins )
    {
      x = 0;
      for ( size_t i = 0; i < ins->size(); ++i )
      {
        x |= ( ( y >> i ) & 1u ) << ( *ins )[i];
      }
    }
    uint64_t const full = base.eval_raw( x );
    uint64_t out = 0;
    for ( size_t j = 0; j < outs.size(); ++j )
    {
      out |= ( ( full >> outs[j] ) & 1u ) << j;
    }
    return out;
  } );
}

/*! Bit-packed truth table, one bit array per output bit, addressed by a
 *  permutation of the input variables.  Address bit (width_in - 1 - i) holds
 *  input variable order[i], so a path that fixes a prefix of the order maps
 *  to one contiguous address range — the workhorse of the exhaustive sweep. */
class packed_truth_table
{
public:
  packed_truth_table( oracle const& fn, std::vector<uint32_t> const& order,
                      uint32_t threshold = default_exhaustive_threshold )
      : _width_in( fn.num_inputs() ), _width_out( fn.num_outputs() ), _order( order )
  {
    if ( _width_in > threshold )
    {
      throw enumeration_refused( _width_in, threshold );
    }
    uint64_t const n = uint64_t( 1 ) << _width_in;
    uint64_t const words = ( n + 63u ) / 64u;
    _bits.assign( _width_out, std::vector<uint64_t>( words, 0u ) );
    for ( uint64_t x = 0; x < n; ++x )
    {
      uint64_t const a = address_of( x );
      uint64_t const y = fn.eval_raw( x );
      for ( uint32_t j = 0; j < _width_out; ++j )
      {
        if ( ( y >> j ) & 1u )
        {
          _bits[j][a >> 6] |= uint64_t( 1 ) << ( a & 63u );
        }
      }
    }
  }

  uint32_t width_in() const { return _width_in; }
  uint32_t width_out() const { return _width_out; }
  uint64_t size() const { return uint64_t( 1 ) << _width_in; }

  uint64_t address_of( uint64_t input ) const
  {
    uint64_t a = 0;
    for ( uint32_t i = 0; i < _width_in; ++i )
    {
      a |= ( ( input >> _order[i] ) & 1u ) << ( _width_in - 1u - i );
    }
    return a;
  }

  uint64_t input_of( uint64_t address ) const
  {
    uint64_t x = 0;
    for ( uint32_t i = 0; i < _width_in; ++i )
    {
      x |= ( ( address >> ( _width_in - 1u - i ) ) & 1u ) << _order[i];
    }
    return x;
  }

  bool bit( uint32_t output_bit, uint64_t address ) const
  {
    return ( _bits[output_bit][address >> 6] >> ( address & 63u ) ) & 1u;
  }

  /*! Population count of output_bit over the address range [begin, end). */
  uint64_t count_ones( uint32_t output_bit, uint64_t begin, uint64_t end ) const
  {
    auto const& w = _bits[output_bit];
    uint64_t ones = 0;
    uint64_t pos = begin;
    while ( pos < end )
    {
      uint64_t const word_idx = pos >> 6;
      uint32_t const lo = pos & 63u;
      uint64_t const span = std::min<uint64_t>( end - pos, 64u - lo );
      uint64_t chunk = w[word_idx] >> lo;
      if ( span < 64u )
      {
        chunk &= ( uint64_t( 1 ) << span ) - 1u;
      }
      ones += static_cast<uint64_t>( __builtin_popcountll( chunk ) );
      pos += span;
    }
    return ones;
  }

  /*! Collect up to limit addresses in [begin, end) whose bit differs from guess. */
  void collect_mismatches( uint32_t output_bit, uint64_t begin, uint64_t end, bool guess,
                           size_t limit, std::vector<uint64_t>& out ) const
  {
    auto const& w = _bits[output_bit];
    uint64_t pos = begin;
    while ( pos < end && out.size() < limit )
    {
      uint64_t const word_idx = pos >> 6;
      uint32_t const lo = pos & 63u;
      uint64_t const span = std::min<uint64_t>( end - pos, 64u - lo );
      uint64_t chunk = ( guess ? ~w[word_idx] : w[word_idx] ) >> lo;
      if ( span < 64u )
      {
        chunk &= ( uint64_t( 1 ) << span ) - 1u;
      }
      while ( chunk != 0 && out.size() < limit )
      {
        uint32_t const b = static_cast<uint32_t>( __builtin_ctzll( chunk ) );
        out.push_back( pos + b );
        chunk &= chunk - 1u;
      }
      pos += span;
    }
  }

private:
  uint32_t _width_in;
  uint32_t _width_out;
  std::vector<uint32_t> _order;
  std::vector<std::vector<uint64_t>> _bits;
};

} // namespace bsdsynth
