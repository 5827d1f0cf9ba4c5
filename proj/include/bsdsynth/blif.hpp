/* bsdsynth: oracle-guided combinational logic synthesis
 * Copyright (C) 2026 bsdsynth contributors */

/*!
  \file blif.hpp
  \brief BLIF subset: emission from netlists, ingestion as oracles

  Supported subset: .model, .inputs, .outputs, .names with single-output
  covers ({0,1,-} input columns, uniform output phase per block), .end.
  '#' comments and '\' line continuations are handled.  Latches, hierarchies
  and every other construct raise unsupported_construct.  Emission encodes
  each gate as one .names block; nets are named deterministically (inputs
  x<i>, outputs y<j>, internal n<net>).
*/

#pragma once

#include "errors.hpp"
#include "netlist.hpp"
#include "oracle.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace bsdsynth
{

inline std::string emit_blif( netlist const& nl, std::string const& model_name = "top" )
{
  std::ostringstream os;
  os << ".model " << model_name << "\n";
  os << ".inputs";
  for ( uint32_t i = 0; i < nl.width_in(); ++i )
  {
    os << " x" << i;
  }
  os << "\n.outputs";
  for ( uint32_t j = 0; j < nl.width_out(); ++j )
  {
    os << " y" << j;
  }
  os << "\n";

  auto net_name = [&]( net_id n ) {
    auto const& g = nl.gates()[n];
    return g.kind == gate_kind::input ? "x" + std::to_string( g.input_bit )
                                      : "n" + std::to_string( n );
  };

  for ( net_id n = 0; n < nl.gates().size(); ++n )
  {
    auto const& g = nl.gates()[n];
    switch ( g.kind )
    {
    case gate_kind::input:
      break;
    case gate_kind::constant:
      os << ".names " << net_name( n ) << "\n";
      if ( g.value )
      {
        os << "1\n";
      }
      break;
    case gate_kind::not_gate:
      os << ".names " << net_name( g.a ) << ' ' << net_name( n ) << "\n0 1\n";
      break;
    case gate_kind::mux2:
      os << ".names " << net_name( g.sel ) << ' ' << net_name( g.d1 ) << ' '
         << net_name( g.d0 ) << ' ' << net_name( n ) << "\n11- 1\n0-1 1\n";
      break;
    }
  }
  for ( uint32_t j = 0; j < nl.width_out(); ++j )
  {
    os << ".names " << net_name( nl.outputs()[j] ) << " y" << j << "\n1 1\n";
  }
  os << ".end\n";
  return os.str();
}

namespace detail
{

struct cover_cube
{
  uint64_t care; /* 1 where the column is 0 or 1 */
  uint64_t val;  /* value at care positions */
};

struct lut_node
{
  std::vector<uint32_t> fanin; /* signal ids */
  std::vector<cover_cube> cubes;
  bool on_phase; /* true: cubes are the ON-set, false: OFF-set */
  uint32_t signal;
};

struct blif_model
{
  std::string name;
  uint32_t num_inputs;
  uint32_t num_outputs;
  std::vector<uint32_t> output_signals;
  std::vector<lut_node> nodes; /* topologically ordered */
  uint32_t num_signals;

  uint64_t eval( uint64_t x ) const
  {
    std::vector<uint8_t> values( num_signals, 0u );
    for ( uint32_t i = 0; i < num_inputs; ++i )
    {
      values[i] = ( x >> i ) & 1u;
    }
    for ( auto const& n : nodes )
    {
      uint64_t in = 0;
      for ( size_t k = 0; k < n.fanin.size(); ++k )
      {
        in |= uint64_t( values[n.fanin[k]] ) << k;
      }
      bool match = false;
      for ( auto const& c : n.cubes )
      {
        if ( ( in & c.care ) == c.val )
        {
          match = true;
          break;
        }
      }
      values[n.signal] = ( match == n.on_phase ) ? 1u : 0u;
    }
    uint64_t y = 0;
    for ( uint32_t j = 0; j < num_outputs; ++j )
    {
      y |= uint64_t( values[output_signals[j]] ) << j;
    }
    return y;
  }
};

/*! Split a physical BLIF/PLA line: strips comments, splits on whitespace. */
inline std::vector<std::string> split_tokens( std::string const& line )
{
  std::vector<std::string> tokens;
  std::string tok;
  for ( char const ch : line )
  {
    if ( ch == '#' )
    {
      break;
    }
    if ( ch == ' ' || ch == '\t' || ch == '\r' )
    {
      if ( !tok.empty() )
      {
        tokens.push_back( tok );
        tok.clear();
      }
    }
    else
    {
      tok += ch;
    }
  }
  if ( !tok.empty() )
  {
    tokens.push_back( tok );
  }
  return tokens;
}

/*! Read logical lines (with '\' continuation); yields (line number, tokens). */
inline std::vector<std::pair<uint32_t, std::vector<std::string>>> logical_lines(
    std::string const& text )
{
  std::vector<std::pair<uint32_t, std::vector<std::string>>> lines;
  std::istringstream is( text );
  std::string raw;
  uint32_t lineno = 0;
  uint32_t start = 0;
  std::string pending;
  while ( std::getline( is, raw ) )
  {
    ++lineno;
    bool continued = false;
    std::string body = raw;
    if ( auto const pos = body.find( '#' ); pos != std::string::npos )
    {
      body = body.substr( 0, pos );
    }
    while ( !body.empty() && ( body.back() == '\r' || body.back() == ' ' || body.back() == '\t' ) )
    {
      body.pop_back();
    }
    if ( !body.empty() && body.back() == '\\' )
    {
      continued = true;
      body.pop_back();
    }
    if ( pending.empty() )
    {
      start = lineno;
    }
    pending += body;
    pending += ' ';
    if ( continued )
    {
      continue;
    }
    auto tokens = split_tokens( pending );
    pending.clear();
    if ( !tokens.empty() )
    {
      lines.emplace_back( start, std::move( tokens ) );
    }
  }
  if ( !pending.empty() )
  {
    auto tokens = split_tokens( pending );
    if ( !tokens.empty() )
    {
      lines.emplace_back( start, std::move( tokens ) );
    }
  }
  return lines;
}

} // namespace detail

/*! Parse the BLIF subset into an oracle following cover semantics. */
inline oracle parse_blif( std::string const& text )
{
  auto const lines = detail::logical_lines( text );

  std::string model_name = "blif";
  std::vector<std::string> input_names, output_names;
  std::map<std::string, uint32_t> signal_ids;
  auto signal_of = [&]( std::string const& name ) {
    auto const [it, fresh] = signal_ids.emplace( name, static_cast<uint32_t>( signal_ids.size() ) );
    (void)fresh;
    return it->second;
  };

  struct raw_names
  {
    uint32_t line;
    std::vector<uint32_t> fanin;
    uint32_t signal;
    std::vector<std::pair<std::string, char>> cover; /* pattern, output value */
  };
  std::vector<raw_names> blocks;
  raw_names* open = nullptr;
  bool saw_model = false, ended = false;

  for ( auto const& [lineno, tokens] : lines )
  {
    if ( ended )
    {
      throw parse_error( lineno, "content after .end" );
    }
    auto const& head = tokens.front();
    if ( head[0] == '.' )
    {
      open = nullptr;
      if ( head == ".model" )
      {
        if ( saw_model )
        {
          throw unsupported_construct( lineno, "multiple .model sections" );
        }
        saw_model = true;
        if ( tokens.size() > 1 )
        {
          model_name = tokens[1];
        }
      }
      else if ( head == ".inputs" )
      {
        input_names.insert( input_names.end(), tokens.begin() + 1, tokens.end() );
      }
      else if ( head == ".outputs" )
      {
        output_names.insert( output_names.end(), tokens.begin() + 1, tokens.end() );
      }
      else if ( head == ".names" )
      {
        if ( tokens.size() < 2 )
        {
          throw parse_error( lineno, ".names requires at least an output signal" );
        }
        raw_names block;
        block.line = lineno;
        for ( size_t k = 1; k + 1 < tokens.size(); ++k )
        {
          block.fanin.push_back( signal_of( tokens[k] ) );
        }
        block.signal = signal_of( tokens.back() );
        blocks.push_back( std::move( block ) );
        open = &blocks.back();
      }
      else if ( head == ".end" )
      {
        ended = true;
      }
      else if ( head == ".latch" || head == ".subckt" || head == ".gate" || head == ".mlatch" ||
                head == ".exdc" || head == ".search" )
      {
        throw unsupported_construct( lineno, head );
      }
      else
      {
        throw unsupported_construct( lineno, head );
      }
      continue;
    }

    /* cover line */
    if ( open == nullptr )
    {
      throw parse_error( lineno, "cover line outside a .names block" );
    }
    if ( tokens.size() == 1 )
    {
      if ( !open->fanin.empty() || ( tokens[0] != "0" && tokens[0] != "1" ) )
      {
        throw parse_error( lineno, "malformed cover line" );
      }
      open->cover.emplace_back( "", tokens[0][0] );
    }
    else if ( tokens.size() == 2 )
    {
      if ( tokens[0].size() != open->fanin.size() )
      {
        throw parse_error( lineno, "cover width does not match fanin count" );
      }
      if ( tokens[1] != "0" && tokens[1] != "1" )
      {
        throw parse_error( lineno, "cover output must be 0 or 1" );
      }
      for ( char const ch : tokens[0] )
      {
        if ( ch != '0' && ch != '1' && ch != '-' )
        {
          throw parse_error( lineno, "cover columns must be 0, 1 or -" );
        }
      }
      open->cover.emplace_back( tokens[0], tokens[1][0] );
    }
    else
    {
      throw parse_error( lineno, "malformed cover line" );
    }
  }

  if ( input_names.empty() )
  {
    throw parse_error( 1, "missing .inputs" );
  }
  if ( output_names.empty() )
  {
    throw parse_error( 1, "missing .outputs" );
  }
  if ( input_names.size() > bitvec::max_width || output_names.size() > bitvec::max_width )
  {
    throw parse_error( 1, "at most 64 inputs and 64 outputs are supported" );
  }

  /* inputs take signal ids 0..n-1 in declaration order */
  std::map<std::string, uint32_t> remap_check;
  {
    std::map<std::string, uint32_t> fresh;
    uint32_t next = 0;
    for ( auto const& n : input_names )
    {
      if ( fresh.count( n ) )
      {
        throw parse_error( 1, "duplicate input '" + n + "'" );
      }
      fresh.emplace( n, next++ );
    }
    /* remap previously assigned ids so inputs come first */
    std::vector<uint32_t> relabel( signal_ids.size(), 0u );
    for ( auto const& [name, id] : signal_ids )
    {
      if ( auto it = fresh.find( name ); it != fresh.end() )
      {
        relabel[id] = it->second;
      }
      else
      {
        relabel[id] = next++;
      }
    }
    for ( auto& b : blocks )
    {
      for ( auto& f : b.fanin )
      {
        f = relabel[f];
      }
      b.signal = relabel[b.signal];
    }
    for ( auto const& [name, id] : signal_ids )
    {
      remap_check.emplace( name, relabel[id] );
    }
    /* pull in inputs/outputs that never appeared in a .names block */
    for ( auto const& n : input_names )
    {
      if ( !remap_check.count( n ) )
      {
        remap_check.emplace( n, fresh.at( n ) );
      }
    }
    for ( auto const& n : output_names )
    {
      if ( !remap_check.count( n ) )
      {
        auto it = fresh.find( n );
        if ( it == fresh.end() )
        {
          throw parse_error( 1, "output '" + n + "' is never defined" );
        }
        remap_check.emplace( n, it->second );
      }
    }
  }
  uint32_t const num_inputs = static_cast<uint32_t>( input_names.size() );
  uint32_t num_signals = num_inputs;
  for ( auto const& [name, id] : remap_check )
  {
    num_signals = std::max( num_signals, id + 1u );
  }

  /* each non-input signal must be defined exactly once */
  std::vector<int32_t> defined_by( num_signals, -1 );
  for ( size_t b = 0; b < blocks.size(); ++b )
  {
    auto const sig = blocks[b].signal;
    if ( sig < num_inputs )
    {
      throw parse_error( blocks[b].line, "a .names block may not redefine an input" );
    }
    if ( defined_by[sig] >= 0 )
    {
      throw parse_error( blocks[b].line, "signal defined more than once" );
    }
    defined_by[sig] = static_cast<int32_t>( b );
  }
  for ( auto const& b : blocks )
  {
    for ( auto const f : b.fanin )
    {
      if ( f >= num_inputs && defined_by[f] < 0 )
      {
        throw parse_error( b.line, "undefined signal referenced" );
      }
    }
  }

  /* topological order over blocks (external files may define out of order) */
  std::vector<int> state( blocks.size(), 0 );
  std::vector<size_t> topo;
  topo.reserve( blocks.size() );
  std::vector<size_t> stack;
  for ( size_t b = 0; b < blocks.size(); ++b )
  {
    if ( state[b] != 0 )
    {
      continue;
    }
    stack.push_back( b );
    while ( !stack.empty() )
    {
      size_t const cur = stack.back();
      if ( state[cur] == 1 )
      {
        state[cur] = 2;
        topo.push_back( cur );
        stack.pop_back();
        continue;
      }
      if ( state[cur] == 2 )
      {
        stack.pop_back();
        continue;
      }
      state[cur] = 1;
      for ( auto const f : blocks[cur].fanin )
      {
        if ( f < num_inputs )
        {
          continue;
        }
        size_t const dep = static_cast<size_t>( defined_by[f] );
        if ( state[dep] == 1 )
        {
          throw parse_error( blocks[cur].line, "combinational cycle detected" );
        }
        if ( state[dep] == 0 )
        {
          stack.push_back( dep );
        }
      }
    }
  }

  auto model = std::make_shared<detail::blif_model>();
  model->name = model_name;
  model->num_inputs = num_inputs;
  model->num_outputs = static_cast<uint32_t>( output_names.size() );
  model->num_signals = num_signals;
  for ( auto const& n : output_names )
  {
    model->output_signals.push_back( remap_check.at( n ) );
  }
  for ( auto const b : topo )
  {
    auto const& raw = blocks[b];
    if ( raw.fanin.size() > 63u )
    {
      throw parse_error( raw.line, ".names fanin above 63 is unsupported" );
    }
    detail::lut_node node;
    node.fanin = raw.fanin;
    node.signal = raw.signal;
    node.on_phase = true;
    bool phase_known = false;
    for ( auto const& [pattern, out] : raw.cover )
    {
      bool const on = out == '1';
      if ( phase_known && on != node.on_phase )
      {
        throw parse_error( raw.line, "mixed cover phases in one .names block" );
      }
      node.on_phase = on;
      phase_known = true;
      detail::cover_cube cube{ 0u, 0u };
      for ( size_t k = 0; k < pattern.size(); ++k )
      {
        if ( pattern[k] == '-' )
        {
          continue;
        }
        cube.care |= uint64_t( 1 ) << k;
        if ( pattern[k] == '1' )
        {
          cube.val |= uint64_t( 1 ) << k;
        }
      }
      node.cubes.push_back( cube );
    }
    /* empty cover = constant 0 */
    model->nodes.push_back( std::move( node ) );
  }

  return oracle( model_name, num_inputs, model->num_outputs,
                 [model]( uint64_t x ) { return model->eval( x ); } );
}

} // namespace bsdsynth
