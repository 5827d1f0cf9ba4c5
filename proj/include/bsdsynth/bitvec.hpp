/* bsdsynth: oracle-guided combinational logic synthesis
 * Copyright (C) 2026 bsdsynth contributors */

/*!
  \file bitvec.hpp
  \brief Fixed-width boolean vector, the universal value type for oracle I/O

  Bit 0 is the least significant bit.  Widths range from 1 to 64; the packed
  64-bit representation keeps exhaustive sweeps cheap.
*/

#pragma once

#include "errors.hpp"

#include <cstdint>
#include <string>

namespace bsdsynth
{

class bitvec
{
public:
  static constexpr uint32_t max_width = 64u;

  bitvec() = default;

  bitvec( uint32_t width, uint64_t value = 0u ) : _width( width )
  {
    if ( width < 1u || width > max_width )
    {
      throw contract_error( "bitvec width must be in [1, 64], got " + std::to_string( width ) );
    }
    _bits = value & mask();
  }

  uint32_t width() const { return _width; }

  /*! Packed value, LSB-first. */
  uint64_t value() const { return _bits; }

  bool test( uint32_t index ) const
  {
    check_index( index );
    return ( _bits >> index ) & 1u;
  }

  void set( uint32_t index, bool value )
  {
    check_index( index );
    if ( value )
    {
      _bits |= uint64_t( 1 ) << index;
    }
    else
    {
      _bits &= ~( uint64_t( 1 ) << index );
    }
  }

  uint64_t mask() const
  {
    return _width == 64u ? ~uint64_t( 0 ) : ( ( uint64_t( 1 ) << _width ) - 1u );
  }

  bool operator==( bitvec const& other ) const
  {
    return _width == other._width && _bits == other._bits;
  }
  bool operator!=( bitvec const& other ) const { return !( *this == other ); }

  /*! MSB-first binary rendering, e.g. "0b0110". */
  std::string to_string() const
  {
    std::string s = "0b";
    for ( uint32_t i = _width; i-- > 0; )
    {
      s += ( ( _bits >> i ) & 1u ) ? '1' : '0';
    }
    return s;
  }

private:
  void check_index( uint32_t index ) const
  {
    if ( index >= _width )
    {
      throw contract_error( "bit index " + std::to_string( index ) + " out of range for width " +
                            std::to_string( _width ) );
    }
  }

  uint64_t _bits{ 0 };
  uint32_t _width{ 1 };
};

} // namespace bsdsynth
