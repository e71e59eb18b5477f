#!/usr/bin/env python3
"""Regenerates the committed test fixtures.

mini_corpus/      3 SQLite databases, tables.json, pairs.json (20 pairs)
parser_oracle/    schema-only tables.json used by the hand-labelled parser fixtures

Run from this directory: python3 make_fixtures.py
"""
import json
import os
import sqlite3

HERE = os.path.dirname(os.path.abspath(__file__))

SOCIAL = """
CREATE TABLE user_profiles (
  uid INTEGER PRIMARY KEY,
  name TEXT,
  email TEXT,
  partitionid INTEGER,
  followers INTEGER
);
CREATE TABLE follows (
  f1 INTEGER,
  f2 INTEGER,
  PRIMARY KEY (f1, f2),
  FOREIGN KEY (f1) REFERENCES user_profiles(uid),
  FOREIGN KEY (f2) REFERENCES user_profiles(uid)
);
CREATE TABLE tweets (
  id INTEGER PRIMARY KEY,
  uid INTEGER,
  text TEXT,
  createdate TEXT,
  FOREIGN KEY (uid) REFERENCES user_profiles(uid)
);
INSERT INTO user_profiles VALUES
  (1, 'Iron Man', 'Tony@stark.com', 1, 6662425),
  (2, 'Mary', 'Mary@yale.edu', 2, 890),
  (3, 'Black Widow', 'bw@superhero.com', 23, 35425845),
  (4, 'Susan', 'susan@gmail.com', 1, 100),
  (5, 'Tyler Swift', 'ts@richest.com', 10, 99999998),
  (6, 'Natalie', NULL, 3, 7);
INSERT INTO follows VALUES (1,2),(1,3),(2,3),(3,4),(5,2),(5,4),(2,4),(1,4);
INSERT INTO tweets VALUES
  (1, 1, 'Hello I''m Tony Stark.', '2018-03-09 20:00:14'),
  (2, 3, 'Today I have went shopping at Laurel''s store.', '2018-03-09 20:01:02'),
  (3, 5, 'Let''s go shopping!', '2018-03-12 02:30:30'),
  (4, 1, 'I love my new iPhone', '2018-03-12 02:40:31'),
  (5, 3, 'Walking dog.', '2018-03-13 05:10:10'),
  (6, 5, 'Make America Great Again.', '2018-03-14 09:00:00'),
  (7, 1, 'Suit up.', '2018-03-15 10:00:00');
"""

ELECTION = """
CREATE TABLE representative (
  Representative_ID INTEGER PRIMARY KEY,
  Name TEXT,
  State TEXT,
  Party TEXT,
  Lifespan TEXT
);
CREATE TABLE election (
  Election_ID INTEGER PRIMARY KEY,
  Representative_ID INTEGER,
  Date TEXT,
  Votes REAL,
  Vote_Percent REAL,
  Seats REAL,
  Place REAL,
  FOREIGN KEY (Representative_ID) REFERENCES representative(Representative_ID)
);
INSERT INTO representative VALUES
  (1, 'Dan Quayle', 'Indiana', 'Republican', '1947-'),
  (2, 'John Quayle', 'New York', 'Democratic', '1868-1930'),
  (3, 'Al Quie', 'Minnesota', 'Republican', '1923-'),
  (4, 'James M. Quigley', 'Pennsylvania', 'Democratic', '1918-'),
  (5, 'Jimmy Quillen', 'Tennessee', 'Republican', '1916-2003'),
  (6, 'Lewis Rhodes', 'Pennsylvania', 'Independent', '1900-1980'),
  (7, 'Mark Sanford', 'New York', 'Republican', '1960-');
INSERT INTO election VALUES
  (1, 1, 'July 1942', 9423, 16.2, 6, 1),
  (2, 2, 'October 1942', 11059, 18.5, 9, 2),
  (3, 4, '1946', 13049, 19.5, 10, 3),
  (4, 5, '1949', 14077, 19.5, 12, 4),
  (5, 7, '1953', 12422, 16.0, 10, 5),
  (6, 3, '1956', 10050, 17.1, 8, 6);
"""

SHAKESPEARE = """
CREATE TABLE works (
  id INTEGER PRIMARY KEY,
  Title TEXT,
  LongTitle TEXT,
  Date INTEGER,
  GenreType TEXT
);
CREATE TABLE chapters (
  id INTEGER PRIMARY KEY,
  Act INTEGER,
  Scene INTEGER,
  Description TEXT,
  work_id INTEGER,
  FOREIGN KEY (work_id) REFERENCES works(id)
);
CREATE TABLE characters (
  id INTEGER PRIMARY KEY,
  CharName TEXT,
  Abbrev TEXT,
  Description TEXT
);
CREATE TABLE paragraphs (
  id INTEGER PRIMARY KEY,
  ParagraphNum INTEGER,
  PlainText TEXT,
  character_id INTEGER,
  chapter_id INTEGER,
  FOREIGN KEY (character_id) REFERENCES characters(id),
  FOREIGN KEY (chapter_id) REFERENCES chapters(id)
);
INSERT INTO works VALUES
  (1, 'Twelfth Night', 'Twelfth Night, Or What You Will', 1599, 'Comedy'),
  (2, 'All''s Well That Ends Well', 'All''s Well That Ends Well', 1602, 'Comedy'),
  (3, 'Antony and Cleopatra', 'Antony and Cleopatra', 1606, 'Tragedy'),
  (4, 'As You Like It', 'As You Like It', 1599, 'Comedy'),
  (5, 'Julius Caesar', 'Julius Caesar', 1599, 'Tragedy'),
  (6, 'Henry V', 'History of Henry V', 1598, 'History');
INSERT INTO chapters VALUES
  (18704, 1, 1, 'DUKE ORSINO''s palace.', 1),
  (18705, 1, 2, 'The sea-coast.', 1),
  (18706, 1, 3, 'OLIVIA''s house.', 1),
  (18800, 1, 1, 'Rome. A street.', 5),
  (18801, 1, 2, 'A public place.', 5),
  (18900, 1, 1, 'Alexandria. A room in CLEOPATRA''s palace.', 3);
INSERT INTO characters VALUES
  (1, 'First Apparition', 'First Apparition', ''),
  (2, 'Brutus', 'BRUTUS', 'conspirator against Caesar'),
  (4, 'Cleopatra', 'CLEOPATRA', 'queen of Egypt'),
  (5, 'Viola', 'VIOLA', 'sister of Sebastian'),
  (324, 'Antony', 'ANTONY', 'this friend of Caesar');
INSERT INTO paragraphs VALUES
  (1, 3, 'What country, friends, is this?', 5, 18705),
  (2, 4, 'My brother he is in Elysium.', 5, 18705),
  (3, 10, 'Friends, Romans, countrymen, lend me your ears.', 324, 18801),
  (4, 12, 'Romans, countrymen, and lovers!', 2, 18801),
  (5, 20, 'Into what dangers would you lead me, Cassius?', 2, 18800),
  (6, 5, 'If it be love indeed, tell me how much.', 4, 18900),
  (7, 7, 'Make me a willow cabin at your gate.', 5, 18706);
"""

PAIRS = [
    # social
    {"question_id": "0", "db_id": "social",
     "question": "How many followers does each user have?",
     "query": "SELECT count(*) FROM follows"},
    {"question_id": "1", "db_id": "social",
     "question": "Find the number of followers for each user.",
     "query": "SELECT count(*), f1 FROM follows GROUP BY f1"},
    {"question_id": "2", "db_id": "social",
     "question": "List the names of all users.",
     "query": "SELECT name FROM user_profiles"},
    {"question_id": "3", "db_id": "social",
     "question": "Find the name and email of the user with the most followers.",
     "query": "SELECT name, email FROM user_profiles ORDER BY followers DESC LIMIT 1"},
    {"question_id": "4", "db_id": "social",
     "question": "Find the names of users who have more than one tweet.",
     "query": "SELECT T1.name FROM user_profiles AS T1 JOIN tweets AS T2 ON T1.uid = T2.uid "
              "GROUP BY T2.uid HAVING count(*) > 1"},
    {"question_id": "5", "db_id": "social",
     "question": "Find the id of users who are followed by Mary and Susan.",
     "query": "SELECT T2.f1 FROM user_profiles AS T1 JOIN follows AS T2 ON T1.uid = T2.f2 "
              "WHERE T1.name = \"Mary\" INTERSECT SELECT T2.f1 FROM user_profiles AS T1 "
              "JOIN follows AS T2 ON T1.uid = T2.f2 WHERE T1.name = \"Susan\""},
    {"question_id": "6", "db_id": "social",
     "question": "Find the names of users who have never tweeted.",
     "query": "SELECT name FROM user_profiles WHERE uid NOT IN (SELECT uid FROM tweets)"},
    {"question_id": "7", "db_id": "social",
     "question": "List the text of all tweets in order of date.",
     "query": "SELECT text FROM tweets ORDER BY createdate"},
    # election
    {"question_id": "8", "db_id": "election",
     "question": "What is the party that has the largest number of representatives?",
     "query": "SELECT Party FROM representative GROUP BY Party ORDER BY COUNT(*) DESC LIMIT 1"},
    {"question_id": "9", "db_id": "election",
     "question": "Show each party and the number of representatives in it.",
     "query": "SELECT Party, COUNT(*) FROM representative GROUP BY Party"},
    {"question_id": "10", "db_id": "election",
     "question": "What are the names of representatives whose party is Republican?",
     "query": "SELECT Name FROM representative WHERE Party = \"Republican\""},
    {"question_id": "11", "db_id": "election",
     "question": "Show the names of representatives and the dates of the elections they participated in.",
     "query": "SELECT T2.Name, T1.Date FROM election AS T1 JOIN representative AS T2 "
              "ON T1.Representative_ID = T2.Representative_ID"},
    {"question_id": "12", "db_id": "election",
     "question": "What are the names of representatives in descending order of votes?",
     "query": "SELECT T2.Name FROM election AS T1 JOIN representative AS T2 "
              "ON T1.Representative_ID = T2.Representative_ID ORDER BY Votes DESC"},
    {"question_id": "13", "db_id": "election",
     "question": "List the parties of representatives from New York or Pennsylvania.",
     "query": "SELECT Party FROM representative WHERE State = \"New York\" UNION "
              "SELECT Party FROM representative WHERE State = \"Pennsylvania\""},
    {"question_id": "14", "db_id": "election",
     "question": "What is the average number of votes of representatives from party Republican?",
     "query": "SELECT avg(T1.Votes) FROM election AS T1 JOIN representative AS T2 "
              "ON T1.Representative_ID = T2.Representative_ID WHERE T2.Party = \"Republican\""},
    # shakespeare (BIRD-style keys)
    {"question_id": "15", "db_id": "shakespeare",
     "question": "How many works are comedies?",
     "evidence": "comedies refers to GenreType = 'Comedy'",
     "SQL": "SELECT COUNT(id) FROM works WHERE GenreType = 'Comedy'",
     "difficulty": "simple"},
    {"question_id": "16", "db_id": "shakespeare",
     "question": "List the titles of works written before 1600.",
     "evidence": "written before 1600 refers to Date < 1600",
     "SQL": "SELECT Title FROM works WHERE Date < 1600",
     "difficulty": "simple"},
    {"question_id": "17", "db_id": "shakespeare",
     "question": "Which Shakespeare story with character ID 324 has description of 'this friend of Caesar'?",
     "evidence": "Shakespeare story refers to Title; character ID refers to character_id",
     "SQL": "SELECT T1.Title FROM works AS T1 INNER JOIN chapters AS T2 ON T1.id = T2.work_id "
            "INNER JOIN paragraphs AS T3 ON T2.id = T3.chapter_id INNER JOIN characters AS T4 "
            "ON T3.character_id = T4.id WHERE T3.character_id = 324 "
            "AND T4.Description = 'this friend of Caesar'",
     "difficulty": "challenging"},
    {"question_id": "18", "db_id": "shakespeare",
     "question": "How many chapters are there in the work 'Twelfth Night'?",
     "evidence": "'Twelfth Night' refers to Title = 'Twelfth Night'",
     "SQL": "SELECT COUNT(T2.id) FROM works AS T1 INNER JOIN chapters AS T2 ON T1.id = T2.work_id "
            "WHERE T1.Title = 'Twelfth Night'",
     "difficulty": "moderate"},
    {"question_id": "19", "db_id": "shakespeare",
     "question": "What is the character name of the character that appears in the most paragraphs?",
     "evidence": "character name refers to CharName; most paragraphs refers to MAX(COUNT(paragraphs.id))",
     "SQL": "SELECT T1.CharName FROM characters AS T1 INNER JOIN paragraphs AS T2 "
            "ON T1.id = T2.character_id GROUP BY T1.id ORDER BY COUNT(T2.id) DESC LIMIT 1",
     "difficulty": "moderate"},
]


def introspect(db_id, path):
    """Builds one benchmark-style schema index entry from a live database."""
    con = sqlite3.connect(path)
    tables = [r[0] for r in con.execute(
        "SELECT name FROM sqlite_master WHERE type='table' ORDER BY rowid")]
    entry = {
        "db_id": db_id,
        "table_names_original": tables,
        "table_names": [t.lower().replace("_", " ") for t in tables],
        "column_names_original": [[-1, "*"]],
        "column_names": [[-1, "*"]],
        "column_types": ["text"],
        "primary_keys": [],
        "foreign_keys": [],
    }
    index = {}
    for ti, t in enumerate(tables):
        pk = []
        for cid, name, ctype, _nn, _dflt, pkpos in con.execute(f'PRAGMA table_info("{t}")'):
            idx = len(entry["column_names_original"])
            index[(t.lower(), name.lower())] = idx
            entry["column_names_original"].append([ti, name])
            entry["column_names"].append([ti, name.lower().replace("_", " ")])
            entry["column_types"].append(ctype)
            if pkpos:
                pk.append((pkpos, idx))
        pk.sort()
        if len(pk) == 1:
            entry["primary_keys"].append(pk[0][1])
        elif pk:
            entry["primary_keys"].append([i for _, i in pk])
    for t in tables:
        for row in con.execute(f'PRAGMA foreign_key_list("{t}")'):
            _id, _seq, ref_table, from_col, to_col = row[:5]
            entry["foreign_keys"].append(
                [index[(t.lower(), from_col.lower())], index[(ref_table.lower(), to_col.lower())]])
    con.close()
    return entry


def build_mini_corpus():
    root = os.path.join(HERE, "mini_corpus")
    index = []
    for db_id, script in (("social", SOCIAL), ("election", ELECTION), ("shakespeare", SHAKESPEARE)):
        d = os.path.join(root, "database", db_id)
        os.makedirs(d, exist_ok=True)
        path = os.path.join(d, db_id + ".sqlite")
        if os.path.exists(path):
            os.remove(path)
        con = sqlite3.connect(path)
        con.executescript(script)
        con.commit()
        con.execute("VACUUM")
        con.close()
        index.append(introspect(db_id, path))
    with open(os.path.join(root, "tables.json"), "w") as f:
        json.dump(index, f, indent=2)
        f.write("\n")
    with open(os.path.join(root, "pairs.json"), "w") as f:
        json.dump(PAIRS, f, indent=2)
        f.write("\n")
    return index


def schema_only(db_id, tables):
    """tables: list of (name, [(col, type)], [pk cols], [(col, ref_table, ref_col)])."""
    entry = {
        "db_id": db_id,
        "table_names_original": [t[0] for t in tables],
        "table_names": [t[0].lower() for t in tables],
        "column_names_original": [[-1, "*"]],
        "column_names": [[-1, "*"]],
        "column_types": ["text"],
        "primary_keys": [],
        "foreign_keys": [],
    }
    index = {}
    for ti, (name, cols, _pk, _fk) in enumerate(tables):
        for col, ctype in cols:
            index[(name, col)] = len(entry["column_names_original"])
            entry["column_names_original"].append([ti, col])
            entry["column_names"].append([ti, col.lower()])
            entry["column_types"].append(ctype)
    for name, _cols, pk, fk in tables:
        ids = [index[(name, c)] for c in pk]
        if len(ids) == 1:
            entry["primary_keys"].append(ids[0])
        elif ids:
            entry["primary_keys"].append(ids)
        for col, rt, rc in fk:
            entry["foreign_keys"].append([index[(name, col)], index[(rt, rc)]])
    return entry


def build_parser_oracle(mini_index):
    extra = [
        schema_only("inn_1", [
            ("Rooms", [("RoomId", "TEXT"), ("roomName", "TEXT"), ("beds", "INTEGER"),
                       ("bedType", "TEXT"), ("maxOccupancy", "INTEGER"),
                       ("basePrice", "INTEGER"), ("decor", "TEXT")], ["RoomId"], []),
            ("Reservations", [("Code", "INTEGER"), ("Room", "TEXT"), ("CheckIn", "TEXT"),
                              ("CheckOut", "TEXT"), ("Rate", "REAL"), ("LastName", "TEXT"),
                              ("FirstName", "TEXT"), ("Adults", "INTEGER"), ("Kids", "INTEGER")],
             ["Code"], [("Room", "Rooms", "RoomId")]),
        ]),
        schema_only("manufacturer", [
            ("manufacturer", [("Manufacturer_ID", "INTEGER"), ("Open_Year", "REAL"),
                              ("Name", "TEXT"), ("Num_of_Factories", "INTEGER"),
                              ("Num_of_Shops", "INTEGER")], ["Manufacturer_ID"], []),
        ]),
        schema_only("software_company", [
            ("Demog", [("GEOID", "INTEGER"), ("INHABITANTS_K", "REAL"), ("INCOME_K", "REAL"),
                       ("A_VAR1", "REAL")], ["GEOID"], []),
            ("Customers", [("ID", "INTEGER"), ("SEX", "TEXT"), ("GEOID", "INTEGER")],
             ["ID"], [("GEOID", "Demog", "GEOID")]),
        ]),
        schema_only("mondial_geo", [
            ("river", [("Name", "TEXT"), ("River", "TEXT"), ("Lake", "TEXT"), ("Sea", "TEXT"),
                       ("Length", "REAL"), ("SourceLongitude", "REAL"),
                       ("SourceLatitude", "REAL")], ["Name"], []),
            ("lake", [("Name", "TEXT"), ("Area", "REAL"), ("Depth", "REAL")], ["Name"], []),
        ]),
        schema_only("image_and_language", [
            ("ATT_CLASSES", [("ATT_CLASS_ID", "INTEGER"), ("ATT_CLASS", "TEXT")],
             ["ATT_CLASS_ID"], []),
            ("IMG_OBJ_ATT", [("IMG_ID", "INTEGER"), ("ATT_CLASS_ID", "INTEGER"),
                             ("OBJ_SAMPLE_ID", "INTEGER")],
             ["IMG_ID", "ATT_CLASS_ID", "OBJ_SAMPLE_ID"],
             [("ATT_CLASS_ID", "ATT_CLASSES", "ATT_CLASS_ID")]),
        ]),
    ]
    root = os.path.join(HERE, "parser_oracle")
    os.makedirs(root, exist_ok=True)
    with open(os.path.join(root, "tables.json"), "w") as f:
        json.dump(mini_index + extra, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    build_parser_oracle(build_mini_corpus())
