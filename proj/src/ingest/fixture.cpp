// Desk-scale movie/director fixture. Twelve well-known movies; director
// biographies mention hardship words (refugee, orphaned, prisoner, poverty)
// and plots mention perseverance words (hope, escape, perseverance). Neither
// file crosses the two vocabularies.

#include "saber/ingest/ingest.hpp"

namespace saber {

std::string fixture_movies_tsv() {
   return "tconst\ttitle\tyear\trating\tplot\tnmconst\n"
          "tt0111161\tThe Shawshank Redemption\t1994\t9.3\tTwo imprisoned men bond over a number of years, finding solace and eventual "
          "redemption through hope and acts of common decency.\tnm0001104\n"
          "tt0068646\tThe Godfather\t1972\t9.2\tThe aging patriarch of an organized crime dynasty hands his clandestine empire to his "
          "reluctant son, who clings to hope for a legitimate life.\tnm0000338\n"
          "tt0073486\tOne Flew Over the Cuckoo's Nest\t1975\t8.7\tA criminal pleads insanity and is admitted to a mental institution, "
          "where he rebels against the oppressive nurse and rallies the patients toward escape.\tnm0001232\n"
          "tt0317248\tCity of God\t2002\t8.6\tIn the slums of Rio, two boys take different paths, and one photographer's perseverance "
          "lets him escape the violence.\tnm0576987\n"
          "tt0038650\tIt's a Wonderful Life\t1946\t8.6\tAn angel shows a frustrated businessman what life would have been like if he "
          "had never existed, restoring his hope.\tnm0001008\n"
          "tt0056058\tHarakiri\t1962\t8.6\tWhen a ronin requesting seppuku at a feudal lord's palace is told of the brutal suicide of "
          "another ronin, he reveals how their pasts are intertwined.\tnm0462383\n"
          "tt0253474\tThe Pianist\t2002\t8.5\tA Polish Jewish musician struggles to survive the destruction of the Warsaw ghetto, "
          "kept alive by hope and the help of strangers.\tnm0000591\n"
          "tt0027977\tModern Times\t1936\t8.5\tThe Tramp struggles to live in modern industrialized society with the help of a young "
          "homeless woman.\tnm0000122\n"
          "tt0110357\tThe Lion King\t1994\t8.5\tLion prince Simba flees his kingdom after the murder of his father and finds the "
          "perseverance to return and reclaim his place.\tnm0021249\n"
          "tt0032553\tThe Great Dictator\t1940\t8.4\tA dictator plans to expand his empire while a Jewish barber avoids persecution, "
          "and a closing speech calls for hope.\tnm0000122\n"
          "tt0040522\tBicycle Thieves\t1948\t8.2\tIn postwar Rome a working man's bicycle is stolen, and he and his son search the "
          "city for it with fading hope.\tnm0001120\n"
          "tt0120689\tThe Green Mile\t1999\t8.6\tThe lives of guards on Death Row are changed by a gentle inmate accused of a terrible "
          "crime who has a mysterious gift.\tnm0001104\n";
}

std::string fixture_directors_tsv() {
   return "nmconst\tname\tbiography\n"
          "nm0001104\tFrank Darabont\tBorn in a refugee camp in Montbeliard, France, to Hungarian parents who had fled after the "
          "1956 revolution. The family later settled in Los Angeles.\n"
          "nm0000338\tFrancis Ford Coppola\tGrew up in a family of musicians in Queens, New York. He studied theater at Hofstra "
          "before film school at UCLA.\n"
          "nm0001232\tMilos Forman\tOrphaned during the war after both parents died in Nazi camps. He was raised by relatives in "
          "Czechoslovakia.\n"
          "nm0576987\tFernando Meirelles\tStudied architecture in Sao Paulo. He began his career making experimental videos and "
          "television commercials.\n"
          "nm0001008\tFrank Capra\tEmigrated from Sicily as a child and grew up in poverty in Los Angeles. He sold newspapers to pay "
          "for school.\n"
          "nm0462383\tMasaki Kobayashi\tDrafted into the army during the Second World War. He spent a year as a prisoner of war in "
          "Okinawa.\n"
          "nm0000591\tRoman Polanski\tBorn in Paris, he survived the Krakow ghetto as a child. He grew up in poverty in occupied "
          "Poland.\n"
          "nm0000122\tCharles Chaplin\tSpent his childhood in poverty in London. He was in and out of workhouses while his mother "
          "was institutionalized.\n"
          "nm0021249\tRoger Allers\tTrained as an animator. He worked on television specials and studio features before "
          "co-directing.\n"
          "nm0001120\tVittorio De Sica\tGrew up in poverty in Naples. He began acting as a teenager to support his family.\n";
}

} // namespace saber
