/* bsdsynth: oracle-guided combinational logic synthesis
 * Copyright (C) 2026 bsdsynth contributors */

/*!
  \file verilog.hpp
  \brief Structural Verilog emission

  Self-contained module with input bus x, output bus y, one continuous
  assignment per gate (literal, ~, or ternary), deterministic net names
  n<index>.
*/

#pragma once

#include "errors.hpp"
#include "netlist.hpp"

#include <cctype>
#include <sstream>
#include <string>

namespace bsdsynth
{

inline bool is_valid_verilog_identifier( std::string const& name )
{
  if ( name.empty() || !( std::isalpha( static_cast<unsigned char>( name[0] ) ) || name[0] == '_' ) )
  {
    return false;
  }
  for ( char const ch : name )
  {
    if ( !( std::isalnum( static_cast<unsigned char>( ch ) ) || ch == '_' || ch == '$' ) )
    {
      return false;
    }
  }
  return true;
}

inline std::string emit_verilog_structural( netlist const& nl, std::string const& module_name )
{
  if ( !is_valid_verilog_identifier( module_name ) )
  {
    throw contract_error( "invalid Verilog module name '" + module_name + "'" );
  }
  std::ostringstream os;
  os << "module " << module_name << " (\n";
  os << "  input  wire [" << nl.width_in() - 1u << ":0] x,\n";
  os << "  output wire [" << nl.width_out() - 1u << ":0] y\n";
  os << ");\n";

  auto net = []( net_id n ) { return "n" + std::to_string( n ); };

  for ( net_id n = 0; n < nl.gates().size(); ++n )
  {
    os << "  wire " << net( n ) << ";\n";
  }
  for ( net_id n = 0; n < nl.gates().size(); ++n )
  {
    auto const& g = nl.gates()[n];
    os << "  assign " << net( n ) << " = ";
    switch ( g.kind )
    {
    case gate_kind::input: os << "x[" << g.input_bit << "]"; break;
    case gate_kind::constant: os << ( g.value ? "1'b1" : "1'b0" ); break;
    case gate_kind::not_gate: os << "~" << net( g.a ); break;
    case gate_kind::mux2:
      os << net( g.sel ) << " ? " << net( g.d1 ) << " : " << net( g.d0 );
      break;
    }
    os << ";\n";
  }
  for ( uint32_t j = 0; j < nl.width_out(); ++j )
  {
    os << "  assign y[" << j << "] = " << net( nl.outputs()[j] ) << ";\n";
  }
  os << "endmodule\n";
  return os.str();
}

} // namespace bsdsynth
