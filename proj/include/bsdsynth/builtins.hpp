/* bsdsynth: oracle-guided combinational logic synthesis
 * Copyright (C) 2026 bsdsynth contributors */

/*!
  \file builtins.hpp
  \brief Built-in reference circuits used as golden specifications

  Packing is LSB-first throughout and normative: multi-field inputs place the
  first-listed field in the lowest bits.  Every builtin documents its layout
  next to its factory.
*/

#pragma once

#include "oracle.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace bsdsynth
{

/*! const(n, v): n inputs (ignored), n outputs fixed to the constant v. */
inline oracle make_const( uint32_t width, uint64_t value = 0u )
{
  bitvec const v( width, value ); /* validates width, masks value */
  uint64_t const out = v.value();
  return oracle( "const" + std::to_string( width ), width, width,
                 [out]( uint64_t ) { return out; } );
}

/*! identity(n): output equals input. */
inline oracle make_identity( uint32_t width )
{
  if ( width < 1u || width > bitvec::max_width )
  {
    throw contract_error( "identity width must be in [1, 64]" );
  }
  return oracle( "identity" + std::to_string( width ), width, width,
                 []( uint64_t x ) { return x; } );
}

/*! adder(n): input a = bits [0, n), b = bits [n, 2n); output sum = bits [0, n),
 *  carry = bit n. */
inline oracle make_adder( uint32_t operand_width )
{
  if ( operand_width < 1u || operand_width > 31u )
  {
    throw contract_error( "adder operand width must be in [1, 31]" );
  }
  uint32_t const n = operand_width;
  uint64_t const m = ( uint64_t( 1 ) << n ) - 1u;
  return oracle( "adder" + std::to_string( n ), 2u * n, n + 1u, [n, m]( uint64_t x ) {
    uint64_t const a = x & m;
    uint64_t const b = ( x >> n ) & m;
    return a + b; /* sum in low n bits, carry lands exactly in bit n */
  } );
}

/*! multiplier(n): input a = bits [0, n), b = bits [n, 2n); output 2n-bit product. */
inline oracle make_multiplier( uint32_t operand_width )
{
  if ( operand_width < 1u || operand_width > 32u )
  {
    throw contract_error( "multiplier operand width must be in [1, 32]" );
  }
  uint32_t const n = operand_width;
  uint64_t const m = ( uint64_t( 1 ) << n ) - 1u;
  return oracle( "multiplier" + std::to_string( n ), 2u * n, 2u * n, [n, m]( uint64_t x ) {
    return ( x & m ) * ( ( x >> n ) & m );
  } );
}

/*! ALU op codes, in the order they occupy the 3-bit selector. */
enum class alu_op : uint8_t
{
  add = 0,
  sub = 1,
  band = 2,
  bor = 3,
  bxor = 4,
  bnand = 5,
  slt = 6,
  shl1 = 7
};

/*! alu(n): input a = bits [0, n), b = bits [n, 2n), op = bits [2n, 2n+3);
 *  output n-bit result.  SUB is two's complement, SLT is unsigned (result 1
 *  or 0), SHL1 shifts a left by one. */
inline oracle make_alu( uint32_t operand_width )
{
  if ( operand_width < 1u || operand_width > 30u )
  {
    throw contract_error( "alu operand width must be in [1, 30]" );
  }
  uint32_t const n = operand_width;
  uint64_t const m = ( uint64_t( 1 ) << n ) - 1u;
  return oracle( "alu" + std::to_string( n ), 2u * n + 3u, n, [n, m]( uint64_t x ) {
    uint64_t const a = x & m;
    uint64_t const b = ( x >> n ) & m;
    switch ( static_cast<alu_op>( ( x >> ( 2u * n ) ) & 7u ) )
    {
    case alu_op::add: return ( a + b ) & m;
    case alu_op::sub: return ( a - b ) & m;
    case alu_op::band: return a & b;
    case alu_op::bor: return a | b;
    case alu_op::bxor: return a ^ b;
    case alu_op::bnand: return ~( a & b ) & m;
    case alu_op::slt: return uint64_t( a < b ? 1 : 0 );
    case alu_op::shl1: return ( a << 1 ) & m;
    }
    return uint64_t( 0 );
  } );
}

/*! majority(n), n odd: single output, 1 iff more than n/2 input bits are set. */
inline oracle make_majority( uint32_t width )
{
  if ( width < 1u || width > 63u || width % 2u == 0u )
  {
    throw contract_error( "majority width must be odd and in [1, 63]" );
  }
  uint32_t const half = width / 2u;
  return oracle( "majority" + std::to_string( width ), width, 1u, [half]( uint64_t x ) {
    return uint64_t( __builtin_popcountll( x ) > static_cast<int>( half ) ? 1 : 0 );
  } );
}

/*! Architectural state of the 20-bit nano-CPU.  Packs LSB-first in field
 *  order: r0 bits [0,4), r1 bits [4,8), pc bits [8,12), instr bits [12,20). */
struct nanocpu_state
{
  uint8_t r0;
  uint8_t r1;
  uint8_t pc;
  uint8_t instr;

  uint64_t pack() const
  {
    return uint64_t( r0 & 0xF ) | ( uint64_t( r1 & 0xF ) << 4 ) | ( uint64_t( pc & 0xF ) << 8 ) |
           ( uint64_t( instr ) << 12 );
  }

  static nanocpu_state unpack( uint64_t x )
  {
    return { static_cast<uint8_t>( x & 0xF ), static_cast<uint8_t>( ( x >> 4 ) & 0xF ),
             static_cast<uint8_t>( ( x >> 8 ) & 0xF ), static_cast<uint8_t>( ( x >> 12 ) & 0xFF ) };
  }
};

/*! Nano-ISA op codes (instr bits 7:5). */
enum class nano_op : uint8_t
{
  add = 0,  /*!< rd <- rd + rs (mod 16)            */
  nand = 1, /*!< rd <- ~(rd & rs)                  */
  addi = 2, /*!< rd <- rd + zext(imm) (mod 16)     */
  li = 3,   /*!< rd <- zext(imm)                   */
  bz = 4,   /*!< pc <- pc + sext(imm) if rd == 0   */
  jmp = 5,  /*!< pc <- zext({rs, imm})             */
  mov = 6,  /*!< rd <- rs                          */
  nop = 7
};

/*! Assemble an instruction word: fields MSB-first [op:3 | rd:1 | rs:1 | imm:3]. */
inline uint8_t nano_instr( nano_op op, uint8_t rd = 0, uint8_t rs = 0, uint8_t imm = 0 )
{
  return static_cast<uint8_t>( ( static_cast<uint8_t>( op ) << 5 ) | ( ( rd & 1u ) << 4 ) |
                               ( ( rs & 1u ) << 3 ) | ( imm & 7u ) );
}

/*! One combinational step of the nano-CPU.  Output packs (r0', r1', pc')
 *  LSB-first: r0' bits [0,4), r1' bits [4,8), pc' bits [8,12).  Every
 *  non-branch op sets pc' = pc + 1 (mod 16). */
inline uint64_t nanocpu_step_raw( uint64_t x )
{
  uint32_t const r0 = x & 0xF;
  uint32_t const r1 = ( x >> 4 ) & 0xF;
  uint32_t const pc = ( x >> 8 ) & 0xF;
  uint32_t const instr = ( x >> 12 ) & 0xFF;

  uint32_t const op = ( instr >> 5 ) & 7u;
  uint32_t const rd = ( instr >> 4 ) & 1u;
  uint32_t const rs = ( instr >> 3 ) & 1u;
  uint32_t const imm = instr & 7u;

  uint32_t const rdv = rd ? r1 : r0;
  uint32_t const rsv = rs ? r1 : r0;
  int32_t const simm = imm >= 4u ? static_cast<int32_t>( imm ) - 8 : static_cast<int32_t>( imm );

  uint32_t next_pc = ( pc + 1u ) & 0xF;
  uint32_t result = rdv;
  bool writes = false;

  switch ( static_cast<nano_op>( op ) )
  {
  case nano_op::add: result = ( rdv + rsv ) & 0xF; writes = true; break;
  case nano_op::nand: result = ~( rdv & rsv ) & 0xF; writes = true; break;
  case nano_op::addi: result = ( rdv + imm ) & 0xF; writes = true; break;
  case nano_op::li: result = imm; writes = true; break;
  case nano_op::bz:
    if ( rdv == 0u )
    {
      next_pc = static_cast<uint32_t>( pc + simm ) & 0xF;
    }
    break;
  case nano_op::jmp: next_pc = ( ( rs << 3 ) | imm ) & 0xF; break;
  case nano_op::mov: result = rsv; writes = true; break;
  case nano_op::nop: break;
  }

  uint32_t const r0n = ( writes && rd == 0u ) ? result : r0;
  uint32_t const r1n = ( writes && rd == 1u ) ? result : r1;
  return uint64_t( r0n ) | ( uint64_t( r1n ) << 4 ) | ( uint64_t( next_pc ) << 8 );
}

/*! nanocpu_step: the 20-in / 12-out combinational next-state function. */
inline oracle make_nanocpu_step()
{
  return oracle( "nanocpu_step", 20u, 12u, nanocpu_step_raw );
}

/*! Construct a builtin by name.  Names: const (width [, value]), identity
 *  (width), adder (operand width), multiplier (operand width), alu (operand
 *  width), majority (width), nanocpu_step (no params). */
inline oracle make_builtin( std::string const& name, std::vector<uint64_t> const& params = {} )
{
  auto const expect = [&]( size_t lo, size_t hi ) {
    if ( params.size() < lo || params.size() > hi )
    {
      throw contract_error( "builtin '" + name + "': invalid parameter count" );
    }
  };
  if ( name == "const" )
  {
    expect( 1, 2 );
    return make_const( static_cast<uint32_t>( params[0] ), params.size() > 1 ? params[1] : 0u );
  }
  if ( name == "identity" )
  {
    expect( 1, 1 );
    return make_identity( static_cast<uint32_t>( params[0] ) );
  }
  if ( name == "adder" )
  {
    expect( 1, 1 );
    return make_adder( static_cast<uint32_t>( params[0] ) );
  }
  if ( name == "multiplier" )
  {
    expect( 1, 1 );
    return make_multiplier( static_cast<uint32_t>( params[0] ) );
  }
  if ( name == "alu" )
  {
    expect( 1, 1 );
    return make_alu( static_cast<uint32_t>( params[0] ) );
  }
  if ( name == "majority" )
  {
    expect( 1, 1 );
    return make_majority( static_cast<uint32_t>( params[0] ) );
  }
  if ( name == "nanocpu_step" || name == "nanocpu" )
  {
    expect( 0, 0 );
    return make_nanocpu_step();
  }
  throw contract_error( "unknown builtin oracle '" + name + "'" );
}

} // namespace bsdsynth
