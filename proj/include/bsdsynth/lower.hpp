/* bsdsynth: oracle-guided combinational logic synthesis
 * Copyright (C) 2026 bsdsynth contributors */

/*!
  \file lower.hpp
  \brief Lowering fully determined diagrams to gate-level netlists

  Each decision node becomes one MUX2 gate (select = its variable), shared
  nodes become shared nets, constant leaves become constant drivers.  The
  lowering is direct: gate_count equals the number of distinct reachable
  decision nodes.  Run simplify_netlist afterwards for peephole cleanup.
*/

#pragma once

#include "bsd.hpp"
#include "netlist.hpp"

#include <vector>

namespace bsdsynth
{

inline netlist to_netlist( bsd const& d )
{
  if ( d.spec_leaf_count() != 0u )
  {
    throw lowering_refused( d.spec_leaf_count() );
  }
  netlist out( d.width_in(), d.width_out() );

  std::vector<net_id> input_nets( d.width_in() );
  for ( uint32_t i = 0; i < d.width_in(); ++i )
  {
    input_nets[i] = out.add_input( i );
  }
  net_id const_nets[2] = { null_net, null_net };
  auto intern_const = [&]( bool v ) {
    auto& slot = const_nets[v ? 1 : 0];
    if ( slot == null_net )
    {
      slot = out.add_const( v );
    }
    return slot;
  };

  std::vector<net_id> memo( d.node_count(), null_net );
  struct frame
  {
    node_ref ref;
    bool expanded;
  };
  auto visit = [&]( node_ref start ) {
    std::vector<frame> stack{ { start, false } };
    while ( !stack.empty() )
    {
      auto [ref, expanded] = stack.back();
      stack.pop_back();
      if ( memo[ref] != null_net )
      {
        continue;
      }
      auto const& n = d.node( ref );
      if ( n.kind == node_kind::const_leaf )
      {
        memo[ref] = intern_const( n.value != 0u );
        continue;
      }
      if ( n.kind == node_kind::spec_leaf )
      {
        throw lowering_refused( d.spec_leaf_count() ); /* unreachable after the gate above */
      }
      if ( !expanded )
      {
        stack.push_back( { ref, true } );
        if ( memo[n.hi] == null_net )
        {
          stack.push_back( { n.hi, false } );
        }
        if ( memo[n.lo] == null_net )
        {
          stack.push_back( { n.lo, false } );
        }
        continue;
      }
      memo[ref] = out.add_mux( input_nets[n.var], memo[n.hi], memo[n.lo] );
    }
  };

  for ( uint32_t j = 0; j < d.width_out(); ++j )
  {
    visit( d.root( j ) );
    out.set_output( j, memo[d.root( j )] );
  }
  return out;
}

} // namespace bsdsynth
