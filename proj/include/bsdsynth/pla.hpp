/* bsdsynth: oracle-guided combinational logic synthesis
 * Copyright (C) 2026 bsdsynth contributors */

/*!
  \file pla.hpp
  \brief PLA subset parser (two-level cover truth tables)

  Supported: .i, .o, optional .p / .ilb / .ob, cube lines with {0,1,-} input
  columns and {0,1,~} output columns, .e/.end.  A '1' asserts the output on,
  a '0' asserts it off, '~' asserts nothing; unspecified outputs default to 0.
  Overlapping cubes that assert conflicting values for one output are a parse
  error.
*/

#pragma once

#include "blif.hpp" /* detail::logical_lines */
#include "errors.hpp"
#include "oracle.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace bsdsynth
{

inline oracle parse_pla( std::string const& text, std::string const& name = "pla" )
{
  struct pla_cube
  {
    uint64_t care;
    uint64_t val;
    uint64_t on;  /* outputs asserted 1 */
    uint64_t off; /* outputs asserted 0 */
    uint32_t line;
  };

  uint32_t num_inputs = 0, num_outputs = 0;
  int64_t declared_products = -1;
  bool saw_i = false, saw_o = false, ended = false;
  auto cubes = std::make_shared<std::vector<pla_cube>>();

  for ( auto const& [lineno, tokens] : detail::logical_lines( text ) )
  {
    if ( ended )
    {
      throw parse_error( lineno, "content after .e" );
    }
    auto const& head = tokens.front();
    if ( head[0] == '.' )
    {
      if ( head == ".i" || head == ".o" || head == ".p" )
      {
        if ( tokens.size() != 2 )
        {
          throw parse_error( lineno, head + " expects one integer" );
        }
        uint64_t v = 0;
        try
        {
          size_t pos = 0;
          v = std::stoull( tokens[1], &pos );
          if ( pos != tokens[1].size() )
          {
            throw std::invalid_argument( tokens[1] );
          }
        }
        catch ( std::exception const& )
        {
          throw parse_error( lineno, "bad integer '" + tokens[1] + "'" );
        }
        if ( head == ".i" )
        {
          if ( v < 1u || v > bitvec::max_width )
          {
            throw parse_error( lineno, ".i must be in [1, 64]" );
          }
          num_inputs = static_cast<uint32_t>( v );
          saw_i = true;
        }
        else if ( head == ".o" )
        {
          if ( v < 1u || v > bitvec::max_width )
          {
            throw parse_error( lineno, ".o must be in [1, 64]" );
          }
          num_outputs = static_cast<uint32_t>( v );
          saw_o = true;
        }
        else
        {
          declared_products = static_cast<int64_t>( v );
        }
      }
      else if ( head == ".ilb" || head == ".ob" )
      {
        /* signal names: accepted, count-checked when widths are known */
        if ( head == ".ilb" && saw_i && tokens.size() - 1u != num_inputs )
        {
          throw parse_error( lineno, ".ilb name count does not match .i" );
        }
        if ( head == ".ob" && saw_o && tokens.size() - 1u != num_outputs )
        {
          throw parse_error( lineno, ".ob name count does not match .o" );
        }
      }
      else if ( head == ".e" || head == ".end" )
      {
        ended = true;
      }
      else
      {
        throw unsupported_construct( lineno, head );
      }
      continue;
    }

    if ( !saw_i || !saw_o )
    {
      throw parse_error( lineno, "cube before .i/.o declarations" );
    }
    if ( tokens.size() != 2 )
    {
      throw parse_error( lineno, "cube expects input and output columns" );
    }
    if ( tokens[0].size() != num_inputs )
    {
      throw parse_error( lineno, "cube input width does not match .i" );
    }
    if ( tokens[1].size() != num_outputs )
    {
      throw parse_error( lineno, "cube output width does not match .o" );
    }
    pla_cube cube{ 0u, 0u, 0u, 0u, lineno };
    for ( uint32_t k = 0; k < num_inputs; ++k )
    {
      char const ch = tokens[0][k];
      if ( ch == '-' )
      {
        continue;
      }
      if ( ch != '0' && ch != '1' )
      {
        throw parse_error( lineno, "input columns must be 0, 1 or -" );
      }
      cube.care |= uint64_t( 1 ) << k;
      if ( ch == '1' )
      {
        cube.val |= uint64_t( 1 ) << k;
      }
    }
    for ( uint32_t k = 0; k < num_outputs; ++k )
    {
      char const ch = tokens[1][k];
      if ( ch == '~' )
      {
        continue;
      }
      if ( ch != '0' && ch != '1' )
      {
        throw parse_error( lineno, "output columns must be 0, 1 or ~" );
      }
      ( ch == '1' ? cube.on : cube.off ) |= uint64_t( 1 ) << k;
    }

    /* conflict check against every overlapping earlier cube */
    for ( auto const& other : *cubes )
    {
      uint64_t const both = cube.care & other.care;
      if ( ( cube.val & both ) != ( other.val & both ) )
      {
        continue; /* disjoint input regions */
      }
      if ( ( cube.on & other.off ) != 0u || ( cube.off & other.on ) != 0u )
      {
        throw parse_error( lineno, "overlapping cubes assert conflicting outputs (see line " +
                                       std::to_string( other.line ) + ")" );
      }
    }
    cubes->push_back( cube );
  }

  if ( !saw_i || !saw_o )
  {
    throw parse_error( 1, "missing .i/.o declarations" );
  }
  if ( declared_products >= 0 && static_cast<size_t>( declared_products ) != cubes->size() )
  {
    throw parse_error( 1, ".p declares " + std::to_string( declared_products ) + " products, found " +
                              std::to_string( cubes->size() ) );
  }

  return oracle( name, num_inputs, num_outputs, [cubes]( uint64_t x ) {
    uint64_t y = 0;
    for ( auto const& c : *cubes )
    {
      if ( ( x & c.care ) == c.val )
      {
        y |= c.on;
      }
    }
    return y;
  } );
}

} // namespace bsdsynth
