/* bsdsynth: oracle-guided combinational logic synthesis
 * Copyright (C) 2026 bsdsynth contributors */

/*!
  \file errors.hpp
  \brief Exception types shared across the library
*/

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace bsdsynth
{

/*! Violation of an operation's input contract (widths, ranges, permutations). */
class contract_error : public std::invalid_argument
{
public:
  explicit contract_error( std::string const& what ) : std::invalid_argument( what ) {}
};

/*! Raised when an exhaustive operation is requested above the enumeration threshold. */
class enumeration_refused : public std::runtime_error
{
public:
  enumeration_refused( uint32_t width, uint32_t threshold )
      : std::runtime_error( "enumeration refused: width_in " + std::to_string( width ) +
                            " exceeds exhaustive threshold " + std::to_string( threshold ) ),
        width( width ), threshold( threshold )
  {}
  uint32_t width;
  uint32_t threshold;
};

/*! Raised when lowering a diagram that still carries speculative leaves. */
class lowering_refused : public std::runtime_error
{
public:
  explicit lowering_refused( uint64_t remaining )
      : std::runtime_error( "lowering refused: " + std::to_string( remaining ) +
                            " speculative leaf(s) remain" ),
        remaining_spec_leaves( remaining )
  {}
  uint64_t remaining_spec_leaves;
};

/*! Positioned error for the text-format parsers (BLIF, PLA, diagram dumps). */
class parse_error : public std::runtime_error
{
public:
  parse_error( uint32_t line, std::string const& what )
      : std::runtime_error( "line " + std::to_string( line ) + ": " + what ), line( line )
  {}
  uint32_t line;
};

/*! A construct outside the supported combinational subset (latches, hierarchies, ...). */
class unsupported_construct : public parse_error
{
public:
  unsupported_construct( uint32_t line, std::string const& what )
      : parse_error( line, "unsupported construct: " + what )
  {}
};

} // namespace bsdsynth
