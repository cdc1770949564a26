#include <sstream>

#include "powlgen/petri_net.hpp"
#include "util.hpp"

namespace powlgen::petri {

using detail::xml_escape;

std::string write_pnml(const PetriNet& net) {
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<pnml>\n";
  out << "  <net id=\"net1\" type=\"http://www.pnml.org/version-2009/grammar/pnmlcoremodel\">\n";
  out << "    <page id=\"page1\">\n";
  for (std::size_t p = 0; p < net.places().size(); ++p) {
    const auto& id = xml_escape(net.places()[p].id);
    out << "      <place id=\"" << id << "\">\n";
    out << "        <name>\n          <text>" << id << "</text>\n        </name>\n";
    if (net.initial_marking()[p] > 0)
      out << "        <initialMarking>\n          <text>" << net.initial_marking()[p]
          << "</text>\n        </initialMarking>\n";
    out << "      </place>\n";
  }
  for (const auto& t : net.transitions()) {
    out << "      <transition id=\"" << xml_escape(t.id) << "\">\n";
    if (t.label) out << "        <name>\n          <text>" << xml_escape(*t.label) << "</text>\n        </name>\n";
    out << "      </transition>\n";
  }
  std::size_t arc_id = 0;
  for (const auto& a : net.arcs()) {
    const auto& place = xml_escape(net.places()[a.place].id);
    const auto& trans = xml_escape(net.transitions()[a.transition].id);
    out << "      <arc id=\"a" << ++arc_id << "\" source=\"" << (a.place_to_transition ? place : trans)
        << "\" target=\"" << (a.place_to_transition ? trans : place) << "\"/>\n";
  }
  out << "    </page>\n";
  out << "    <finalmarkings>\n      <marking>\n";
  for (std::size_t p = 0; p < net.places().size(); ++p)
    if (net.final_marking()[p] > 0)
      out << "        <place idref=\"" << xml_escape(net.places()[p].id) << "\">\n          <text>"
          << net.final_marking()[p] << "</text>\n        </place>\n";
  out << "      </marking>\n    </finalmarkings>\n";
  out << "  </net>\n</pnml>\n";
  return out.str();
}

std::string write_dot(const PetriNet& net) {
  std::ostringstream out;
  out << "digraph petri_net {\n  rankdir=LR;\n";
  for (std::size_t p = 0; p < net.places().size(); ++p) {
    const auto& id = net.places()[p].id;
    out << "  \"" << detail::dot_escape(id) << "\" [shape=circle,label=\"";
    if (net.initial_marking()[p]) out << "&#9679;";
    out << "\"";
    if (net.final_marking()[p]) out << ",peripheries=2";
    out << "];\n";
  }
  for (const auto& t : net.transitions()) {
    out << "  \"" << detail::dot_escape(t.id) << "\" [shape=box";
    if (t.label)
      out << ",label=\"" << detail::dot_escape(*t.label) << "\"";
    else
      out << ",label=\"\",style=filled,fillcolor=black,width=0.15";
    out << "];\n";
  }
  for (const auto& a : net.arcs()) {
    const auto& place = detail::dot_escape(net.places()[a.place].id);
    const auto& trans = detail::dot_escape(net.transitions()[a.transition].id);
    if (a.place_to_transition)
      out << "  \"" << place << "\" -> \"" << trans << "\";\n";
    else
      out << "  \"" << trans << "\" -> \"" << place << "\";\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace powlgen::petri
