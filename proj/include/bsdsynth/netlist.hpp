/* bsdsynth: oracle-guided combinational logic synthesis
 * Copyright (C) 2026 bsdsynth contributors */

/*!
  \file netlist.hpp
  \brief Gate-level IR over the {MUX2, NOT, CONST} basis

  Nets are gate indices; operands must be defined before use, so every
  netlist is topologically ordered and acyclic by construction.  Netlists are
  immutable once their outputs are bound and safe to simulate concurrently.
  gate_count counts MUX2 and NOT gates (constants and inputs are free);
  depth is the longest input-to-output path in counted gates.
*/

#pragma once

#include "bitvec.hpp"
#include "errors.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace bsdsynth
{

using net_id = uint32_t;
inline constexpr net_id null_net = std::numeric_limits<net_id>::max();

enum class gate_kind : uint8_t
{
  input,
  constant,
  not_gate,
  mux2
};

struct gate
{
  gate_kind kind;
  bool value;         /* constant */
  uint32_t input_bit; /* input */
  net_id a;           /* not: operand */
  net_id sel, d1, d0; /* mux2: output = sel ? d1 : d0 */
};

struct netlist_metrics
{
  uint64_t gate_count;
  uint64_t depth;
};

class netlist
{
public:
  netlist( uint32_t width_in, uint32_t width_out )
      : _width_in( width_in ), _width_out( width_out ), _outputs( width_out, null_net )
  {
    if ( width_in < 1u || width_in > bitvec::max_width || width_out < 1u ||
         width_out > bitvec::max_width )
    {
      throw contract_error( "netlist widths must be in [1, 64]" );
    }
  }

  uint32_t width_in() const { return _width_in; }
  uint32_t width_out() const { return _width_out; }
  std::vector<gate> const& gates() const { return _gates; }
  std::vector<net_id> const& outputs() const { return _outputs; }

  net_id add_input( uint32_t bit )
  {
    if ( bit >= _width_in )
    {
      throw contract_error( "input bit out of range" );
    }
    return append( { gate_kind::input, false, bit, null_net, null_net, null_net, null_net } );
  }

  net_id add_const( bool value )
  {
    return append( { gate_kind::constant, value, 0u, null_net, null_net, null_net, null_net } );
  }

  net_id add_not( net_id a )
  {
    check_net( a );
    return append( { gate_kind::not_gate, false, 0u, a, null_net, null_net, null_net } );
  }

  net_id add_mux( net_id sel, net_id d1, net_id d0 )
  {
    check_net( sel );
    check_net( d1 );
    check_net( d0 );
    return append( { gate_kind::mux2, false, 0u, null_net, sel, d1, d0 } );
  }

  void set_output( uint32_t output_bit, net_id net )
  {
    if ( output_bit >= _width_out )
    {
      throw contract_error( "output bit out of range" );
    }
    check_net( net );
    _outputs[output_bit] = net;
    _metrics.reset();
  }

  bool outputs_bound() const
  {
    for ( auto const o : _outputs )
    {
      if ( o == null_net )
      {
        return false;
      }
    }
    return true;
  }

  uint64_t simulate_raw( uint64_t input, std::vector<uint8_t>& scratch ) const
  {
    require_bound();
    scratch.resize( _gates.size() );
    for ( size_t i = 0; i < _gates.size(); ++i )
    {
      auto const& g = _gates[i];
      switch ( g.kind )
      {
      case gate_kind::input: scratch[i] = ( input >> g.input_bit ) & 1u; break;
      case gate_kind::constant: scratch[i] = g.value ? 1u : 0u; break;
      case gate_kind::not_gate: scratch[i] = scratch[g.a] ^ 1u; break;
      case gate_kind::mux2: scratch[i] = scratch[g.sel] ? scratch[g.d1] : scratch[g.d0]; break;
      }
    }
    uint64_t out = 0;
    for ( uint32_t j = 0; j < _width_out; ++j )
    {
      out |= uint64_t( scratch[_outputs[j]] ) << j;
    }
    return out;
  }

  uint64_t simulate_raw( uint64_t input ) const
  {
    std::vector<uint8_t> scratch;
    return simulate_raw( input, scratch );
  }

  bitvec simulate( bitvec const& input ) const
  {
    if ( input.width() != _width_in )
    {
      throw contract_error( "netlist expects " + std::to_string( _width_in ) +
                            " input bits, got " + std::to_string( input.width() ) );
    }
    return bitvec( _width_out, simulate_raw( input.value() ) );
  }

  /*! 64 assignments at once, bitwise-parallel.  input_patterns[i] packs the
   *  value of input bit i across the 64 assignments. */
  std::vector<uint64_t> simulate_block( std::vector<uint64_t> const& input_patterns,
                                        std::vector<uint64_t>& scratch ) const
  {
    require_bound();
    if ( input_patterns.size() != _width_in )
    {
      throw contract_error( "simulate_block expects one pattern word per input bit" );
    }
    scratch.resize( _gates.size() );
    for ( size_t i = 0; i < _gates.size(); ++i )
    {
      auto const& g = _gates[i];
      switch ( g.kind )
      {
      case gate_kind::input: scratch[i] = input_patterns[g.input_bit]; break;
      case gate_kind::constant: scratch[i] = g.value ? ~uint64_t( 0 ) : 0u; break;
      case gate_kind::not_gate: scratch[i] = ~scratch[g.a]; break;
      case gate_kind::mux2:
        scratch[i] = ( scratch[g.sel] & scratch[g.d1] ) | ( ~scratch[g.sel] & scratch[g.d0] );
        break;
      }
    }
    std::vector<uint64_t> out( _width_out );
    for ( uint32_t j = 0; j < _width_out; ++j )
    {
      out[j] = scratch[_outputs[j]];
    }
    return out;
  }

  netlist_metrics const& metrics() const
  {
    if ( !_metrics )
    {
      require_bound();
      uint64_t count = 0;
      std::vector<uint64_t> depth( _gates.size(), 0u );
      for ( size_t i = 0; i < _gates.size(); ++i )
      {
        auto const& g = _gates[i];
        switch ( g.kind )
        {
        case gate_kind::input:
        case gate_kind::constant: break;
        case gate_kind::not_gate:
          ++count;
          depth[i] = depth[g.a] + 1u;
          break;
        case gate_kind::mux2:
          ++count;
          depth[i] = std::max( { depth[g.sel], depth[g.d1], depth[g.d0] } ) + 1u;
          break;
        }
      }
      uint64_t d = 0;
      for ( auto const o : _outputs )
      {
        d = std::max( d, depth[o] );
      }
      _metrics = netlist_metrics{ count, d };
    }
    return *_metrics;
  }

private:
  net_id append( gate const& g )
  {
    _gates.push_back( g );
    _metrics.reset();
    return static_cast<net_id>( _gates.size() - 1u );
  }

  void check_net( net_id n ) const
  {
    if ( n >= _gates.size() )
    {
      throw contract_error( "operand net must be defined before use" );
    }
  }

  void require_bound() const
  {
    if ( !outputs_bound() )
    {
      throw contract_error( "netlist outputs are not fully bound" );
    }
  }

  uint32_t _width_in;
  uint32_t _width_out;
  std::vector<gate> _gates;
  std::vector<net_id> _outputs;
  mutable std::optional<netlist_metrics> _metrics;
};

/*! Peephole cleanup: deduplicates inputs/constants, folds constant selectors
 *  and double negations, rewrites constant-data muxes to wires or NOT gates,
 *  and drops muxes whose data inputs coincide.  Semantics preserved. */
inline netlist simplify_netlist( netlist const& src )
{
  netlist out( src.width_in(), src.width_out() );
  std::vector<net_id> fwd( src.gates().size(), null_net );
  net_id input_nets[64];
  net_id const_nets[2] = { null_net, null_net };
  for ( auto& n : input_nets )
  {
    n = null_net;
  }

  auto intern_const = [&]( bool v ) {
    auto& slot = const_nets[v ? 1 : 0];
    if ( slot == null_net )
    {
      slot = out.add_const( v );
    }
    return slot;
  };
  auto const_value = [&]( net_id n ) -> std::optional<bool> {
    if ( out.gates()[n].kind == gate_kind::constant )
    {
      return out.gates()[n].value;
    }
    return std::nullopt;
  };

  for ( size_t i = 0; i < src.gates().size(); ++i )
  {
    auto const& g = src.gates()[i];
    switch ( g.kind )
    {
    case gate_kind::input:
    {
      auto& slot = input_nets[g.input_bit];
      if ( slot == null_net )
      {
        slot = out.add_input( g.input_bit );
      }
      fwd[i] = slot;
      break;
    }
    case gate_kind::constant:
      fwd[i] = intern_const( g.value );
      break;
    case gate_kind::not_gate:
    {
      net_id const a = fwd[g.a];
      if ( auto v = const_value( a ) )
      {
        fwd[i] = intern_const( !*v );
      }
      else if ( out.gates()[a].kind == gate_kind::not_gate )
      {
        fwd[i] = out.gates()[a].a;
      }
      else
      {
        fwd[i] = out.add_not( a );
      }
      break;
    }
    case gate_kind::mux2:
    {
      net_id const sel = fwd[g.sel];
      net_id const d1 = fwd[g.d1];
      net_id const d0 = fwd[g.d0];
      auto const s = const_value( sel );
      if ( s )
      {
        fwd[i] = *s ? d1 : d0;
        break;
      }
      if ( d1 == d0 )
      {
        fwd[i] = d1;
        break;
      }
      auto const v1 = const_value( d1 );
      auto const v0 = const_value( d0 );
      if ( v1 && v0 )
      {
        fwd[i] = *v1 && !*v0 ? sel : out.add_not( sel ); /* (1,0) wire, (0,1) inverter */
        break;
      }
      fwd[i] = out.add_mux( sel, d1, d0 );
      break;
    }
    }
  }
  for ( uint32_t j = 0; j < src.width_out(); ++j )
  {
    out.set_output( j, fwd[src.outputs()[j]] );
  }
  return out;
}

} // namespace bsdsynth
