"""Write the bundled dua store (verbatim Arabic, English translation, source)."""

import json
import sys

DUAS = [
    ("entering_bathroom", "Entering the bathroom or toilet | عند دخول الخلاء",
     "بِسْمِ اللَّهِ، اللَّهُمَّ إِنِّي أَعُوذُ بِكَ مِنَ الْخُبُثِ وَالْخَبَائِثِ",
     "In the name of Allah. O Allah, I seek refuge in You from the male and female devils.",
     "https://sunnah.com/bukhari:142"),
    ("leaving_bathroom", "Leaving the bathroom or toilet | عند الخروج من الخلاء",
     "غُفْرَانَكَ",
     "I seek Your forgiveness.",
     "https://sunnah.com/abudawud:30"),
    ("before_eating", "Before eating a meal | قبل الطعام",
     "بِسْمِ اللَّهِ",
     "In the name of Allah.",
     "https://sunnah.com/abudawud:3767"),
    ("after_eating", "After finishing a meal | بعد الفراغ من الطعام",
     "الْحَمْدُ لِلَّهِ الَّذِي أَطْعَمَنِي هَذَا وَرَزَقَنِيهِ مِنْ غَيْرِ حَوْلٍ مِنِّي وَلَا قُوَّةٍ",
     "Praise be to Allah who fed me this and provided it for me without any power or strength on my part.",
     "https://sunnah.com/tirmidhi:3458"),
    ("before_sleeping", "Before going to sleep at night | عند النوم",
     "بِاسْمِكَ اللَّهُمَّ أَمُوتُ وَأَحْيَا",
     "In Your name, O Allah, I die and I live.",
     "https://sunnah.com/bukhari:6312"),
    ("waking_up", "Waking up from sleep in the morning | عند الاستيقاظ من النوم",
     "الْحَمْدُ لِلَّهِ الَّذِي أَحْيَانَا بَعْدَ مَا أَمَاتَنَا وَإِلَيْهِ النُّشُورُ",
     "Praise be to Allah who gave us life after causing us to die, and to Him is the resurrection.",
     "https://sunnah.com/bukhari:6312"),
    ("leaving_home", "Leaving the house | عند الخروج من المنزل",
     "بِسْمِ اللَّهِ، تَوَكَّلْتُ عَلَى اللَّهِ، وَلَا حَوْلَ وَلَا قُوَّةَ إِلَّا بِاللَّهِ",
     "In the name of Allah, I place my trust in Allah, and there is no power and no strength except with Allah.",
     "https://sunnah.com/abudawud:5095"),
    ("entering_home", "Entering the house | عند دخول المنزل",
     "بِسْمِ اللَّهِ وَلَجْنَا، وَبِسْمِ اللَّهِ خَرَجْنَا، وَعَلَى رَبِّنَا تَوَكَّلْنَا",
     "In the name of Allah we enter, in the name of Allah we leave, and upon our Lord we rely.",
     "https://sunnah.com/abudawud:5096"),
    ("entering_mosque", "Entering the mosque | عند دخول المسجد",
     "اللَّهُمَّ افْتَحْ لِي أَبْوَابَ رَحْمَتِكَ",
     "O Allah, open for me the gates of Your mercy.",
     "https://sunnah.com/abudawud:465"),
    ("leaving_mosque", "Leaving the mosque | عند الخروج من المسجد",
     "اللَّهُمَّ إِنِّي أَسْأَلُكَ مِنْ فَضْلِكَ",
     "O Allah, I ask You from Your bounty.",
     "https://sunnah.com/abudawud:465"),
    ("travelling", "Travelling or riding a vehicle | دعاء السفر وركوب الدابة",
     "سُبْحَانَ الَّذِي سَخَّرَ لَنَا هَذَا وَمَا كُنَّا لَهُ مُقْرِنِينَ، وَإِنَّا إِلَى رَبِّنَا لَمُنْقَلِبُونَ",
     "Glory be to the One who has subjected this to us, and we could never have done it ourselves; and to our Lord we will surely return.",
     "https://quran.com/43/13"),
    ("distress", "Distress, anxiety and hardship | عند الكرب والهم",
     "لَا إِلَهَ إِلَّا أَنْتَ سُبْحَانَكَ إِنِّي كُنْتُ مِنَ الظَّالِمِينَ",
     "There is no god but You; glory be to You. Indeed I have been among the wrongdoers.",
     "https://quran.com/21/87"),
    ("breaking_fast", "Breaking the fast at iftar | عند الإفطار",
     "ذَهَبَ الظَّمَأُ وَابْتَلَّتِ الْعُرُوقُ وَثَبَتَ الْأَجْرُ إِنْ شَاءَ اللَّهُ",
     "The thirst has gone, the veins are moistened, and the reward is confirmed, if Allah wills.",
     "https://sunnah.com/abudawud:2357"),
    ("visiting_sick", "Visiting a sick person | عند عيادة المريض",
     "لَا بَأْسَ، طَهُورٌ إِنْ شَاءَ اللَّهُ",
     "No harm; it is a purification, if Allah wills.",
     "https://sunnah.com/bukhari:5656"),
    ("for_parents", "Praying for one's parents | الدعاء للوالدين",
     "رَبِّ ارْحَمْهُمَا كَمَا رَبَّيَانِي صَغِيرًا",
     "My Lord, have mercy on them as they raised me when I was small.",
     "https://quran.com/17/24"),
    ("for_knowledge", "Seeking knowledge before study or exams | طلب العلم",
     "رَبِّ زِدْنِي عِلْمًا",
     "My Lord, increase me in knowledge.",
     "https://quran.com/20/114"),
    ("good_both_worlds", "Good in this world and the hereafter | خير الدنيا والآخرة",
     "رَبَّنَا آتِنَا فِي الدُّنْيَا حَسَنَةً وَفِي الْآخِرَةِ حَسَنَةً وَقِنَا عَذَابَ النَّارِ",
     "Our Lord, give us good in this world and good in the hereafter, and protect us from the punishment of the Fire.",
     "https://quran.com/2/201"),
    ("rain", "When it rains | عند نزول المطر",
     "اللَّهُمَّ صَيِّبًا نَافِعًا",
     "O Allah, let it be a beneficial rain.",
     "https://sunnah.com/bukhari:1032"),
    ("seeking_forgiveness", "Seeking forgiveness (master supplication for forgiveness) | سيد الاستغفار",
     "اللَّهُمَّ أَنْتَ رَبِّي لَا إِلَهَ إِلَّا أَنْتَ، خَلَقْتَنِي وَأَنَا عَبْدُكَ، وَأَنَا عَلَى عَهْدِكَ وَوَعْدِكَ مَا اسْتَطَعْتُ، أَعُوذُ بِكَ مِنْ شَرِّ مَا صَنَعْتُ، أَبُوءُ لَكَ بِنِعْمَتِكَ عَلَيَّ، وَأَبُوءُ بِذَنْبِي فَاغْفِرْ لِي، فَإِنَّهُ لَا يَغْفِرُ الذُّنُوبَ إِلَّا أَنْتَ",
     "O Allah, You are my Lord; there is no god but You. You created me and I am Your servant, and I keep Your covenant and promise as best I can. I seek refuge in You from the evil of what I have done. I acknowledge Your favour upon me and I acknowledge my sin, so forgive me, for none forgives sins except You.",
     "https://sunnah.com/bukhari:6306"),
    ("sneezing", "After sneezing | عند العطاس",
     "الْحَمْدُ لِلَّهِ",
     "Praise be to Allah. (The listener replies: yarhamuka Allah, may Allah have mercy on you.)",
     "https://sunnah.com/bukhari:6224"),
    ("anger", "When angry | عند الغضب",
     "أَعُوذُ بِاللَّهِ مِنَ الشَّيْطَانِ الرَّجِيمِ",
     "I seek refuge in Allah from the accursed devil.",
     "https://sunnah.com/bukhari:3282"),
    ("laylat_al_qadr", "Laylat al-Qadr, the Night of Decree | ليلة القدر",
     "اللَّهُمَّ إِنَّكَ عَفُوٌّ تُحِبُّ الْعَفْوَ فَاعْفُ عَنِّي",
     "O Allah, You are pardoning and love to pardon, so pardon me.",
     "https://sunnah.com/tirmidhi:3513"),
]


def main(out: str) -> None:
    with open(out, "w", encoding="utf-8") as fh:
        for key, occasion, arabic, translation, url in DUAS:
            rec = {"page_title": key, "occasion": occasion, "arabic": arabic, "translation": translation, "reference_url": url}
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "duas.jsonl")
