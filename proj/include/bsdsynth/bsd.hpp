/* bsdsynth: oracle-guided combinational logic synthesis
 * Copyright (C) 2026 bsdsynth contributors */

/*!
  \file bsd.hpp
  \brief Binary speculation diagrams

  A binary speculation diagram (BSD) is an ordered decision DAG with one root
  per output bit.  Leaves are either determined constants or speculative
  constants (guesses).  Expanding a speculative leaf replaces it in place by a
  decision on the next unfixed variable of the global order, with two fresh
  child leaves; repair loops drive these expansions until the diagram matches
  its oracle.  The node table is append-only; garbage is collected only by
  reduce(), which rebuilds the reachable part with hash-consing and removes
  redundant tests.

  Invariants maintained here:
   - decision children test only variables strictly later in the order
   - speculative leaves and in-repair constant leaves have a unique parent,
     so expansion and in-place value repair are local
   - a speculative leaf's depth (variables fixed on every path to it) is
     strictly below width_in
*/

#pragma once

#include "bitvec.hpp"
#include "errors.hpp"
#include "oracle.hpp"
#include "rng.hpp"

#include <algorithm>
#include <cstdint>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

namespace bsdsynth
{

using node_ref = uint32_t;
inline constexpr node_ref null_ref = std::numeric_limits<node_ref>::max();

enum class node_kind : uint8_t
{
  decision,
  const_leaf,
  spec_leaf
};

struct bsd_node
{
  node_kind kind;
  uint8_t value; /* const: value; spec: guess */
  uint8_t depth; /* spec: variables fixed on every path to this leaf */
  uint32_t var;  /* decision: input bit index */
  node_ref hi;
  node_ref lo;
};

/*! How to seed the guesses of fresh speculative leaves. */
struct guess_policy
{
  enum class kind : uint8_t
  {
    random_seeded,           /*!< independent fair coin per leaf, seeded     */
    constant_zero,           /*!< every guess 0                              */
    sample_majority,         /*!< majority of cached samples in the cofactor */
    exact_cofactor_majority  /*!< majority of the oracle over the cofactor
                                  (test harness only, enumerable widths)     */
  };

  kind mode = kind::sample_majority;
  uint64_t seed = 0;
  bool tie_break = false;
  oracle const* reference = nullptr; /* exact_cofactor_majority */

  static guess_policy random( uint64_t seed )
  {
    guess_policy p;
    p.mode = kind::random_seeded;
    p.seed = seed;
    return p;
  }
  static guess_policy zero()
  {
    guess_policy p;
    p.mode = kind::constant_zero;
    return p;
  }
  static guess_policy majority( bool tie_break = false )
  {
    guess_policy p;
    p.mode = kind::sample_majority;
    p.tie_break = tie_break;
    return p;
  }
  static guess_policy exact( oracle const& reference, bool tie_break = false )
  {
    guess_policy p;
    p.mode = kind::exact_cofactor_majority;
    p.reference = &reference;
    p.tie_break = tie_break;
    return p;
  }
};

class bsd
{
public:
  /*! Fresh diagram: one speculative leaf per output bit, guesses per policy. */
  bsd( uint32_t width_in, uint32_t width_out, std::vector<uint32_t> order,
       guess_policy const& policy = guess_policy::zero(),
       uint32_t threshold = default_exhaustive_threshold )
      : _width_in( width_in ), _width_out( width_out ), _order( std::move( order ) )
  {
    if ( _width_in < 1u || _width_in > bitvec::max_width || _width_out < 1u ||
         _width_out > bitvec::max_width )
    {
      throw contract_error( "bsd widths must be in [1, 64]" );
    }
    check_permutation();
    build_positions();

    std::vector<bool> guesses( _width_out, false );
    switch ( policy.mode )
    {
    case guess_policy::kind::constant_zero:
      break;
    case guess_policy::kind::sample_majority:
      guesses.assign( _width_out, policy.tie_break );
      break;
    case guess_policy::kind::random_seeded:
    {
      input_sampler gen( policy.seed, 1u );
      for ( uint32_t j = 0; j < _width_out; ++j )
      {
        guesses[j] = gen.next_bit();
      }
      break;
    }
    case guess_policy::kind::exact_cofactor_majority:
    {
      if ( policy.reference == nullptr )
      {
        throw contract_error( "exact_cofactor_majority requires a reference oracle" );
      }
      if ( _width_in > threshold )
      {
        throw enumeration_refused( _width_in, threshold );
      }
      std::vector<uint64_t> ones( _width_out, 0u );
      uint64_t const n = uint64_t( 1 ) << _width_in;
      for ( uint64_t x = 0; x < n; ++x )
      {
        uint64_t const y = policy.reference->eval_raw( x );
        for ( uint32_t j = 0; j < _width_out; ++j )
        {
          ones[j] += ( y >> j ) & 1u;
        }
      }
      for ( uint32_t j = 0; j < _width_out; ++j )
      {
        guesses[j] = ones[j] * 2u == n ? policy.tie_break : ones[j] * 2u > n;
      }
      break;
    }
    }

    _roots.reserve( _width_out );
    for ( uint32_t j = 0; j < _width_out; ++j )
    {
      _roots.push_back( append_spec( guesses[j], 0u ) );
    }
  }

  uint32_t width_in() const { return _width_in; }
  uint32_t width_out() const { return _width_out; }
  std::vector<uint32_t> const& order() const { return _order; }

  /*! Position of an input variable in the order (its decision level). */
  uint32_t position_of( uint32_t var ) const { return _positions[var]; }

  node_ref root( uint32_t output_bit ) const
  {
    if ( output_bit >= _width_out )
    {
      throw contract_error( "root index out of range" );
    }
    return _roots[output_bit];
  }
  std::vector<node_ref> const& roots() const { return _roots; }

  bsd_node const& node( node_ref ref ) const
  {
    check_ref( ref );
    return _nodes[ref];
  }
  std::vector<bsd_node> const& nodes() const { return _nodes; }

  uint64_t node_count() const { return _nodes.size(); }
  uint64_t spec_leaf_count() const { return _spec_leaves; }

  uint64_t eval_raw( uint64_t input ) const
  {
    uint64_t out = 0;
    for ( uint32_t j = 0; j < _width_out; ++j )
    {
      out |= uint64_t( eval_bit_raw( j, input ) ) << j;
    }
    return out;
  }

  bool eval_bit_raw( uint32_t output_bit, uint64_t input ) const
  {
    node_ref ref = _roots[output_bit];
    while ( _nodes[ref].kind == node_kind::decision )
    {
      auto const& n = _nodes[ref];
      ref = ( ( input >> n.var ) & 1u ) ? n.hi : n.lo;
    }
    return _nodes[ref].value != 0u;
  }

  bitvec eval( bitvec const& input ) const
  {
    if ( input.width() != _width_in )
    {
      throw contract_error( "bsd expects " + std::to_string( _width_in ) + " input bits, got " +
                            std::to_string( input.width() ) );
    }
    return bitvec( _width_out, eval_raw( input.value() ) );
  }

  /*! Shannon-expand a speculative leaf in place: the leaf becomes a decision
   *  on the next unfixed variable, its children are fresh leaves carrying the
   *  given guesses (constant leaves when every variable is then fixed).
   *  References to the expanded node remain valid; all paths that avoid it
   *  evaluate unchanged.  Returns the (hi, lo) children. */
  std::pair<node_ref, node_ref> shannon_expand( node_ref leaf, bool hi_guess, bool lo_guess )
  {
    check_ref( leaf );
    if ( _nodes[leaf].kind != node_kind::spec_leaf )
    {
      throw contract_error( "shannon_expand requires a speculative leaf" );
    }
    uint32_t const depth = _nodes[leaf].depth;
    uint32_t const var = _order[depth];
    node_ref hi, lo;
    if ( depth + 1u == _width_in )
    {
      hi = append_const( hi_guess );
      lo = append_const( lo_guess );
    }
    else
    {
      hi = append_spec( hi_guess, static_cast<uint8_t>( depth + 1u ) );
      lo = append_spec( lo_guess, static_cast<uint8_t>( depth + 1u ) );
    }
    auto& n = _nodes[leaf];
    n.kind = node_kind::decision;
    n.var = var;
    n.hi = hi;
    n.lo = lo;
    n.value = 0;
    n.depth = 0;
    --_spec_leaves;
    return { hi, lo };
  }

  /*! Overwrite a leaf's constant/guess value in place (hard-fault repair). */
  void set_leaf_value( node_ref leaf, bool value )
  {
    check_ref( leaf );
    if ( _nodes[leaf].kind == node_kind::decision )
    {
      throw contract_error( "set_leaf_value requires a leaf" );
    }
    _nodes[leaf].value = value ? 1u : 0u;
  }

  /*! Demote a constant leaf back to a speculative leaf (recovery path for
   *  hard faults below full depth).  The leaf keeps its value as the guess. */
  void demote_to_spec( node_ref leaf, uint8_t depth )
  {
    check_ref( leaf );
    if ( _nodes[leaf].kind != node_kind::const_leaf )
    {
      throw contract_error( "demote_to_spec requires a constant leaf" );
    }
    if ( depth >= _width_in )
    {
      throw contract_error( "a speculation with all variables fixed must stay constant" );
    }
    _nodes[leaf].kind = node_kind::spec_leaf;
    _nodes[leaf].depth = depth;
    ++_spec_leaves;
  }

  /*! Redirect one edge (test fixtures and recovery paths; assumes tree-shaped
   *  regions so stale targets do not stay reachable). */
  void replace_edge( node_ref parent, bool via_hi, node_ref target )
  {
    check_ref( parent );
    check_ref( target );
    if ( _nodes[parent].kind != node_kind::decision )
    {
      throw contract_error( "replace_edge requires a decision parent" );
    }
    ( via_hi ? _nodes[parent].hi : _nodes[parent].lo ) = target;
    recompute_stats();
  }

  /*! Promote every reachable speculative leaf to a constant leaf carrying its
   *  guess.  Called once a diagram's speculation has been verified. */
  void promote_spec_leaves()
  {
    std::vector<bool> seen( _nodes.size(), false );
    std::vector<node_ref> stack( _roots.begin(), _roots.end() );
    while ( !stack.empty() )
    {
      node_ref const ref = stack.back();
      stack.pop_back();
      if ( seen[ref] )
      {
        continue;
      }
      seen[ref] = true;
      auto& n = _nodes[ref];
      if ( n.kind == node_kind::decision )
      {
        stack.push_back( n.hi );
        stack.push_back( n.lo );
      }
      else if ( n.kind == node_kind::spec_leaf )
      {
        n.kind = node_kind::const_leaf;
        n.depth = 0;
        --_spec_leaves;
      }
    }
  }

  /*! Rebuild a diagram from raw parts, validating every invariant.  Used by
   *  reduce() and the dump parser. */
  static bsd from_parts( uint32_t width_in, uint32_t width_out, std::vector<uint32_t> order,
                         std::vector<bsd_node> nodes, std::vector<node_ref> roots )
  {
    bsd d( private_tag{}, width_in, width_out, std::move( order ) );
    if ( roots.size() != width_out )
    {
      throw contract_error( "bsd requires one root per output bit" );
    }
    d._nodes = std::move( nodes );
    d._roots = std::move( roots );
    d.validate();
    d.recompute_stats();
    return d;
  }

  /*! Full invariant check (ordered property, ref ranges, consistent
   *  speculative depths, decision-node uniqueness, unique speculative-leaf
   *  parents).  Throws on violation. */
  void validate() const
  {
    std::set<std::tuple<uint32_t, node_ref, node_ref>> unique;
    std::vector<uint32_t> spec_parents( _nodes.size(), 0u );
    for ( auto const& n : _nodes )
    {
      if ( n.kind == node_kind::decision )
      {
        check_ref( n.hi );
        check_ref( n.lo );
        if ( n.var >= _width_in )
        {
          throw contract_error( "decision variable out of range" );
        }
        if ( !unique.emplace( n.var, n.hi, n.lo ).second )
        {
          throw contract_error( "hash-consing uniqueness violated: duplicate decision node" );
        }
        for ( auto const child : { n.hi, n.lo } )
        {
          if ( _nodes[child].kind == node_kind::spec_leaf && ++spec_parents[child] > 1u )
          {
            throw contract_error( "speculative leaf must have a unique parent" );
          }
        }
      }
      else if ( n.kind == node_kind::spec_leaf && n.depth >= _width_in )
      {
        throw contract_error( "speculative leaf with all variables fixed" );
      }
    }
    /* DFS: strictly increasing variable positions, path-consistent depths */
    std::vector<bool> expanded( _nodes.size(), false );
    for ( auto const root : _roots )
    {
      check_ref( root );
      std::vector<std::tuple<node_ref, uint32_t, uint32_t>> stack; /* ref, min position, depth */
      stack.emplace_back( root, 0u, 0u );
      while ( !stack.empty() )
      {
        auto const [ref, min_pos, depth] = stack.back();
        stack.pop_back();
        auto const& n = _nodes[ref];
        if ( n.kind == node_kind::decision && _positions[n.var] < min_pos )
        {
          throw contract_error( "ordered-diagram property violated" );
        }
        if ( n.kind == node_kind::spec_leaf && n.depth != depth )
        {
          throw contract_error( "speculative leaf depth disagrees with its path" );
        }
        if ( expanded[ref] )
        {
          continue;
        }
        expanded[ref] = true;
        if ( n.kind == node_kind::decision )
        {
          stack.emplace_back( n.hi, _positions[n.var] + 1u, depth + 1u );
          stack.emplace_back( n.lo, _positions[n.var] + 1u, depth + 1u );
        }
      }
    }
  }

  /*! Recount speculative leaves reachable from the roots. */
  void recompute_stats()
  {
    std::vector<bool> seen( _nodes.size(), false );
    std::vector<node_ref> stack( _roots.begin(), _roots.end() );
    uint64_t specs = 0;
    while ( !stack.empty() )
    {
      node_ref const ref = stack.back();
      stack.pop_back();
      if ( seen[ref] )
      {
        continue;
      }
      seen[ref] = true;
      auto const& n = _nodes[ref];
      if ( n.kind == node_kind::decision )
      {
        stack.push_back( n.hi );
        stack.push_back( n.lo );
      }
      else if ( n.kind == node_kind::spec_leaf )
      {
        ++specs;
      }
    }
    _spec_leaves = specs;
  }

  bool operator==( bsd const& other ) const
  {
    if ( _width_in != other._width_in || _width_out != other._width_out ||
         _order != other._order || _roots != other._roots ||
         _nodes.size() != other._nodes.size() )
    {
      return false;
    }
    for ( size_t i = 0; i < _nodes.size(); ++i )
    {
      auto const& a = _nodes[i];
      auto const& b = other._nodes[i];
      if ( a.kind != b.kind )
      {
        return false;
      }
      switch ( a.kind )
      {
      case node_kind::decision:
        if ( a.var != b.var || a.hi != b.hi || a.lo != b.lo )
        {
          return false;
        }
        break;
      case node_kind::const_leaf:
        if ( a.value != b.value )
        {
          return false;
        }
        break;
      case node_kind::spec_leaf:
        if ( a.value != b.value || a.depth != b.depth )
        {
          return false;
        }
        break;
      }
    }
    return true;
  }
  bool operator!=( bsd const& other ) const { return !( *this == other ); }

  /*! Line-oriented dump: header then one node per line
   *  (id kind var hi lo guess); "-" marks fields a kind does not use.
   *  Byte-stable for fixed seeds. */
  void write_dump( std::ostream& os ) const
  {
    os << "bsd 1\n";
    os << "in " << _width_in << "\n";
    os << "out " << _width_out << "\n";
    os << "order";
    for ( auto const v : _order )
    {
      os << ' ' << v;
    }
    os << "\nroots";
    for ( auto const r : _roots )
    {
      os << ' ' << r;
    }
    os << "\n";
    for ( size_t i = 0; i < _nodes.size(); ++i )
    {
      auto const& n = _nodes[i];
      os << "node " << i << ' ';
      switch ( n.kind )
      {
      case node_kind::decision:
        os << "decision " << n.var << ' ' << n.hi << ' ' << n.lo << " -";
        break;
      case node_kind::const_leaf:
        os << "const - - - " << uint32_t( n.value );
        break;
      case node_kind::spec_leaf:
        os << "spec - - - " << uint32_t( n.value );
        break;
      }
      os << "\n";
    }
  }

  std::string dump() const
  {
    std::ostringstream os;
    write_dump( os );
    return os.str();
  }

  static bsd read_dump( std::istream& is )
  {
    auto expect_key = []( std::istringstream& ls, std::string const& key, uint32_t line ) {
      std::string k;
      if ( !( ls >> k ) || k != key )
      {
        throw parse_error( line, "expected '" + key + "'" );
      }
    };
    std::string text_line;
    uint32_t line = 0;

    auto next_line = [&]() -> std::istringstream {
      while ( std::getline( is, text_line ) )
      {
        ++line;
        if ( !text_line.empty() && text_line.back() == '\r' )
        {
          text_line.pop_back();
        }
        if ( !text_line.empty() )
        {
          return std::istringstream( text_line );
        }
      }
      throw parse_error( line, "unexpected end of dump" );
    };

    {
      auto ls = next_line();
      std::string magic;
      uint32_t version = 0;
      if ( !( ls >> magic >> version ) || magic != "bsd" || version != 1u )
      {
        throw parse_error( line, "not a bsd dump (expected 'bsd 1')" );
      }
    }
    uint32_t width_in = 0, width_out = 0;
    {
      auto ls = next_line();
      expect_key( ls, "in", line );
      if ( !( ls >> width_in ) )
      {
        throw parse_error( line, "bad input width" );
      }
    }
    {
      auto ls = next_line();
      expect_key( ls, "out", line );
      if ( !( ls >> width_out ) )
      {
        throw parse_error( line, "bad output width" );
      }
    }
    std::vector<uint32_t> order;
    {
      auto ls = next_line();
      expect_key( ls, "order", line );
      uint32_t v;
      while ( ls >> v )
      {
        order.push_back( v );
      }
      if ( order.size() != width_in )
      {
        throw parse_error( line, "order must list every input variable" );
      }
    }
    std::vector<node_ref> roots;
    {
      auto ls = next_line();
      expect_key( ls, "roots", line );
      node_ref r;
      while ( ls >> r )
      {
        roots.push_back( r );
      }
      if ( roots.size() != width_out )
      {
        throw parse_error( line, "roots must list one node per output bit" );
      }
    }

    std::vector<bsd_node> nodes;
    while ( std::getline( is, text_line ) )
    {
      ++line;
      if ( !text_line.empty() && text_line.back() == '\r' )
      {
        text_line.pop_back();
      }
      if ( text_line.empty() )
      {
        continue;
      }
      std::istringstream ls( text_line );
      std::string key, kind, var_s, hi_s, lo_s, guess_s;
      uint64_t id = 0;
      if ( !( ls >> key >> id >> kind >> var_s >> hi_s >> lo_s >> guess_s ) || key != "node" )
      {
        throw parse_error( line, "malformed node line" );
      }
      if ( id != nodes.size() )
      {
        throw parse_error( line, "node ids must be dense and ascending" );
      }
      auto parse_u32 = [&]( std::string const& s ) -> uint32_t {
        try
        {
          size_t pos = 0;
          unsigned long const v = std::stoul( s, &pos );
          if ( pos != s.size() )
          {
            throw std::invalid_argument( s );
          }
          return static_cast<uint32_t>( v );
        }
        catch ( std::exception const& )
        {
          throw parse_error( line, "bad integer field '" + s + "'" );
        }
      };
      bsd_node n{};
      if ( kind == "decision" )
      {
        n.kind = node_kind::decision;
        n.var = parse_u32( var_s );
        n.hi = parse_u32( hi_s );
        n.lo = parse_u32( lo_s );
      }
      else if ( kind == "const" || kind == "spec" )
      {
        n.kind = kind == "const" ? node_kind::const_leaf : node_kind::spec_leaf;
        uint32_t const g = parse_u32( guess_s );
        if ( g > 1u )
        {
          throw parse_error( line, "leaf value must be 0 or 1" );
        }
        n.value = static_cast<uint8_t>( g );
      }
      else
      {
        throw parse_error( line, "unknown node kind '" + kind + "'" );
      }
      nodes.push_back( n );
    }

    /* speculative depths are not serialized; recover them from root paths */
    bsd d( private_tag{}, width_in, width_out, std::move( order ) );
    d._nodes = std::move( nodes );
    d._roots = std::move( roots );
    d.recover_spec_depths();
    d.validate();
    d.recompute_stats();
    return d;
  }

private:
  struct private_tag
  {};

  bsd( private_tag, uint32_t width_in, uint32_t width_out, std::vector<uint32_t> order )
      : _width_in( width_in ), _width_out( width_out ), _order( std::move( order ) )
  {
    if ( _width_in < 1u || _width_in > bitvec::max_width || _width_out < 1u ||
         _width_out > bitvec::max_width )
    {
      throw contract_error( "bsd widths must be in [1, 64]" );
    }
    check_permutation();
    build_positions();
  }

  void check_permutation() const
  {
    if ( _order.size() != _width_in )
    {
      throw contract_error( "variable order must list every input bit exactly once" );
    }
    std::vector<bool> seen( _width_in, false );
    for ( auto const v : _order )
    {
      if ( v >= _width_in || seen[v] )
      {
        throw contract_error( "variable order is not a permutation of the inputs" );
      }
      seen[v] = true;
    }
  }

  void build_positions()
  {
    _positions.assign( _width_in, 0u );
    for ( uint32_t i = 0; i < _width_in; ++i )
    {
      _positions[_order[i]] = i;
    }
  }

  void check_ref( node_ref ref ) const
  {
    if ( ref >= _nodes.size() )
    {
      throw contract_error( "node reference out of range" );
    }
  }

  node_ref append_spec( bool guess, uint8_t depth )
  {
    _nodes.push_back( { node_kind::spec_leaf, guess ? uint8_t( 1 ) : uint8_t( 0 ), depth, 0u,
                        null_ref, null_ref } );
    ++_spec_leaves;
    return static_cast<node_ref>( _nodes.size() - 1u );
  }

  node_ref append_const( bool value )
  {
    _nodes.push_back( { node_kind::const_leaf, value ? uint8_t( 1 ) : uint8_t( 0 ), 0u, 0u,
                        null_ref, null_ref } );
    return static_cast<node_ref>( _nodes.size() - 1u );
  }

  void recover_spec_depths()
  {
    std::vector<int32_t> depth_seen( _nodes.size(), -1 );
    for ( auto const root : _roots )
    {
      if ( root >= _nodes.size() )
      {
        throw contract_error( "root reference out of range" );
      }
      std::vector<std::pair<node_ref, uint32_t>> stack{ { root, 0u } };
      while ( !stack.empty() )
      {
        auto const [ref, depth] = stack.back();
        stack.pop_back();
        if ( depth_seen[ref] >= 0 )
        {
          continue;
        }
        depth_seen[ref] = static_cast<int32_t>( depth );
        auto& n = _nodes[ref];
        if ( n.kind == node_kind::decision )
        {
          if ( n.hi >= _nodes.size() || n.lo >= _nodes.size() )
          {
            throw contract_error( "node reference out of range" );
          }
          stack.emplace_back( n.hi, depth + 1u );
          stack.emplace_back( n.lo, depth + 1u );
        }
        else if ( n.kind == node_kind::spec_leaf )
        {
          if ( depth >= _width_in )
          {
            throw contract_error( "speculative leaf with all variables fixed" );
          }
          n.depth = static_cast<uint8_t>( depth );
        }
      }
    }
  }

  uint32_t _width_in;
  uint32_t _width_out;
  std::vector<uint32_t> _order;
  std::vector<uint32_t> _positions;
  std::vector<bsd_node> _nodes;
  std::vector<node_ref> _roots;
  uint64_t _spec_leaves{ 0 };
};

/*! Natural variable order 0, 1, ..., width_in-1. */
inline std::vector<uint32_t> natural_order( uint32_t width_in )
{
  std::vector<uint32_t> order( width_in );
  for ( uint32_t i = 0; i < width_in; ++i )
  {
    order[i] = i;
  }
  return order;
}

/*! Support-breadth order: inputs ranked by how many output bits their
 *  estimated support covers, most first; ties keep the natural order.  A
 *  variable that feeds every output is decided early, one that feeds few is
 *  decided late, which keeps expansion trees small for multi-output specs. */
inline std::vector<uint32_t> support_breadth_order( oracle const& fn, uint64_t seed,
                                                    size_t samples_per_bit = 256u )
{
  std::vector<uint32_t> breadth( fn.num_inputs(), 0u );
  for ( uint32_t j = 0; j < fn.num_outputs(); ++j )
  {
    for ( auto const v : estimate_support( fn, j, derive_seed( seed, j ), samples_per_bit ) )
    {
      ++breadth[v];
    }
  }
  auto order = natural_order( fn.num_inputs() );
  std::stable_sort( order.begin(), order.end(),
                    [&]( uint32_t a, uint32_t b ) { return breadth[a] > breadth[b]; } );
  return order;
}

struct accuracy_result
{
  double aggregate;
  std::vector<double> per_bit;
};

/*! Fraction of matching output bits, per bit and averaged over samples. */
inline accuracy_result accuracy_on( bsd const& d, std::vector<io_sample> const& samples )
{
  if ( samples.empty() )
  {
    throw contract_error( "accuracy_on requires at least one sample" );
  }
  std::vector<uint64_t> match( d.width_out(), 0u );
  for ( auto const& s : samples )
  {
    if ( s.input.width() != d.width_in() || s.output.width() != d.width_out() )
    {
      throw contract_error( "sample widths do not match the diagram" );
    }
    uint64_t const got = d.eval_raw( s.input.value() );
    uint64_t const agree = ~( got ^ s.output.value() );
    for ( uint32_t j = 0; j < d.width_out(); ++j )
    {
      match[j] += ( agree >> j ) & 1u;
    }
  }
  accuracy_result r;
  r.per_bit.resize( d.width_out() );
  double sum = 0.0;
  for ( uint32_t j = 0; j < d.width_out(); ++j )
  {
    r.per_bit[j] = static_cast<double>( match[j] ) / static_cast<double>( samples.size() );
    sum += r.per_bit[j];
  }
  r.aggregate = sum / static_cast<double>( d.width_out() );
  return r;
}

/*! Accuracy over the full enumeration. */
inline double exact_accuracy( bsd const& d, oracle const& fn,
                              uint32_t threshold = default_exhaustive_threshold )
{
  if ( d.width_in() != fn.num_inputs() || d.width_out() != fn.num_outputs() )
  {
    throw contract_error( "oracle widths do not match the diagram" );
  }
  if ( d.width_in() > threshold )
  {
    throw enumeration_refused( d.width_in(), threshold );
  }
  uint64_t const n = uint64_t( 1 ) << d.width_in();
  uint64_t matches = 0;
  for ( uint64_t x = 0; x < n; ++x )
  {
    uint64_t const agree = ~( d.eval_raw( x ) ^ fn.eval_raw( x ) );
    matches += static_cast<uint64_t>(
        __builtin_popcountll( agree & ( d.width_out() == 64u
                                            ? ~uint64_t( 0 )
                                            : ( ( uint64_t( 1 ) << d.width_out() ) - 1u ) ) ) );
  }
  return static_cast<double>( matches ) /
         ( static_cast<double>( n ) * static_cast<double>( d.width_out() ) );
}

/*! ROBDD-style reduction over the reachable part: removes redundant decisions
 *  (hi == lo), hash-conses structurally equal decision nodes, interns the two
 *  constants, and compacts the table.  Speculative leaves are copied, never
 *  merged.  Semantics are preserved on every input; idempotent. */
inline bsd reduce( bsd const& d )
{
  struct cons_key
  {
    uint32_t var;
    node_ref hi;
    node_ref lo;
    bool operator==( cons_key const& o ) const
    {
      return var == o.var && hi == o.hi && lo == o.lo;
    }
  };
  struct cons_hash
  {
    size_t operator()( cons_key const& k ) const
    {
      return static_cast<size_t>( splitmix64( ( uint64_t( k.var ) << 48 ) ^
                                              ( uint64_t( k.hi ) << 24 ) ^ uint64_t( k.lo ) ) );
    }
  };

  std::vector<bsd_node> out_nodes;
  std::unordered_map<cons_key, node_ref, cons_hash> cons;
  node_ref const_refs[2] = { null_ref, null_ref };
  std::vector<node_ref> memo( d.node_count(), null_ref );

  auto intern_const = [&]( bool value ) {
    auto& slot = const_refs[value ? 1 : 0];
    if ( slot == null_ref )
    {
      out_nodes.push_back( { node_kind::const_leaf, value ? uint8_t( 1 ) : uint8_t( 0 ), 0u, 0u,
                             null_ref, null_ref } );
      slot = static_cast<node_ref>( out_nodes.size() - 1u );
    }
    return slot;
  };

  /* iterative postorder to keep stack depth independent of diagram size */
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
      if ( memo[ref] != null_ref )
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
        out_nodes.push_back( n ); /* speculative leaves are never merged */
        memo[ref] = static_cast<node_ref>( out_nodes.size() - 1u );
        continue;
      }
      if ( !expanded )
      {
        stack.push_back( { ref, true } );
        if ( memo[n.hi] == null_ref )
        {
          stack.push_back( { n.hi, false } );
        }
        if ( memo[n.lo] == null_ref )
        {
          stack.push_back( { n.lo, false } );
        }
        continue;
      }
      node_ref const hi = memo[n.hi];
      node_ref const lo = memo[n.lo];
      if ( hi == lo )
      {
        memo[ref] = hi; /* redundant test */
        continue;
      }
      cons_key const key{ n.var, hi, lo };
      if ( auto it = cons.find( key ); it != cons.end() )
      {
        memo[ref] = it->second;
        continue;
      }
      out_nodes.push_back( { node_kind::decision, 0u, 0u, n.var, hi, lo } );
      memo[ref] = static_cast<node_ref>( out_nodes.size() - 1u );
      cons.emplace( key, memo[ref] );
    }
  };

  std::vector<node_ref> roots;
  roots.reserve( d.width_out() );
  for ( auto const root : d.roots() )
  {
    visit( root );
    roots.push_back( memo[root] );
  }
  return bsd::from_parts( d.width_in(), d.width_out(), d.order(), std::move( out_nodes ),
                          std::move( roots ) );
}

} // namespace bsdsynth
